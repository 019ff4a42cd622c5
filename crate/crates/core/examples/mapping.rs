//! Map vulnerabilities to weaknesses by cosine similarity, including a tie.

use vulnmap::corpus::{Corpus, DocumentKind, RawDocument, Repository, SegmentOrigin, TextSegment};
use vulnmap::groundtruth::LabelMap;
use vulnmap::preprocess::{StemmedCorpus, StopWordList};
use vulnmap::similarity::{cosine_matrix, extract_vuln_by_weakness, map_vulnerabilities};
use vulnmap::weights::{compute_stats, weigh, WeightScheme, DEFAULT_BETA};

fn doc(id: &str, kind: DocumentKind, text: &str) -> RawDocument {
    RawDocument {
        id: id.into(),
        kind,
        repository: if kind == DocumentKind::Weakness { Repository::None } else { Repository::Npm },
        segments: vec![TextSegment {
            origin: SegmentOrigin::FirstOrder,
            content: text.into(),
            source_label: String::new(),
        }],
        references: vec![],
    }
}

fn main() -> vulnmap::Result<()> {
    let corpus = Corpus::new(vec![
        doc("CWE-79", DocumentKind::Weakness, "script injection browser page script browser"),
        doc("CWE-89", DocumentKind::Weakness, "query injection database query database"),
        doc("CWE-20", DocumentKind::Weakness, "injection"),
        doc("CWE-94", DocumentKind::Weakness, "injection"),
        doc("v1", DocumentKind::Vulnerability, "attacker script browser page"),
        doc("v2", DocumentKind::Vulnerability, "crafted database query"),
        doc("v3", DocumentKind::Vulnerability, "injection"),
    ])?;
    let stemmed = StemmedCorpus::new(&corpus, &StopWordList::bundled());
    let counts = stemmed.counts(&stemmed.vocabulary(1)?);
    let stats = compute_stats(&counts, DEFAULT_BETA)?;
    let weights = weigh(&counts, &stats, WeightScheme::TfIdf);
    let matrix = extract_vuln_by_weakness(&cosine_matrix(&weights), &corpus)?;
    for m in map_vulnerabilities(&matrix, &LabelMap::new()) {
        println!(
            "{} -> {:?} (score {:.4}, tied {}, {})",
            m.vulnerability_id,
            m.predicted_cwe,
            m.score,
            m.tied,
            m.tie_resolved_by.as_str()
        );
    }
    Ok(())
}
