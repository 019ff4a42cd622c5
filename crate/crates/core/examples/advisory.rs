//! Extract first-order text and reference links from a Snyk advisory.
//!
//! ```text
//! cargo run --example advisory [path/to/advisory.md]
//! ```

use vulnmap::corpus::{extract_first_order, extract_links, strip_markup};

const SAMPLE: &str = "\
# Denial of Service (DoS)
## Overview
[ws](https://www.npmjs.com/package/ws) is a WebSocket client and server.
Affected versions are vulnerable to a memory exhaustion flaw.
## Remediation
Upgrade `ws` to version 1.1.1 or higher.
## References
- [GitHub Commit](https://github.com/websockets/ws/commit/0328a8f)
- [NVD](https://nvd.nist.gov/vuln/detail/CVE-2016-10542)
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SAMPLE.to_string(),
    };
    println!("first-order text:\n{}\n", extract_first_order(&report));
    println!("references:");
    for link in extract_links(&report) {
        println!("  {link}");
    }
    let page = "<html><body><p>Upgrade&nbsp;to <b>1.1.1</b></p>\n<script>x()</script></body></html>";
    println!("\nstripped page: {:?}", strip_markup(page));
    Ok(())
}
