//! Qualify advisory text against an NVD CVE-to-CWE mapping.

use std::path::Path;

use vulnmap::groundtruth::{allowed_cwe_set, qualify_text, scan_identifiers, NvdMapping};

const MAPPING: &str = "cve_id,cwe_id,status
CVE-2017-7525,CWE-502,Analyzed
CVE-2016-10745,CWE-79,REJECTED
CVE-2018-1000620,CWE-400,Analyzed
";

fn main() -> vulnmap::Result<()> {
    let mapping = NvdMapping::from_reader(MAPPING.as_bytes(), Path::new("inline.csv"))?;
    let allowed = allowed_cwe_set(&mapping)?;

    let texts = [
        "Deserialization flaw, see CVE-2017-7525 and CAN-2017-7525.",
        "Classified as CWE-0502.",
        "Mentions CVE-2017-7525 and CWE-400.",
        "Tracked as CVE-2016-10745.",
        "Unknown CVE-2099-0001.",
        "No identifiers at all.",
    ];
    for text in texts {
        let ids: Vec<String> = scan_identifiers(text).into_iter().map(|m| m.normalized_id).collect();
        println!("{text}\n  identifiers: {ids:?}\n  outcome: {:?}\n", qualify_text("example", text, &mapping, &allowed));
    }
    Ok(())
}
