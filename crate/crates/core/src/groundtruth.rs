//! Regex ground truth: which single CWE a vulnerability refers to, if any.
//!
//! A vulnerability qualifies when its text mentions exactly one distinct
//! identifier (a CWE, or a CVE that NVD maps to a CWE) and that CWE is one of
//! the weaknesses NVD uses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, RawDocument};
use crate::error::{Error, Result};

static IDENTIFIER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(?:CWE-([0-9]+))|(?:(?:CVE|CAN)-([0-9]{4}-[0-9]{4,}))").unwrap()
});

static CWE_ID: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^CWE-[0-9]+$").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IdentifierKind {
    Cwe,
    Cve,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifierMatch {
    pub kind: IdentifierKind,
    /// `CWE-<digits>` (no leading zeros) or `CVE-<yyyy>-<digits>`.
    pub normalized_id: String,
    /// Character (not byte) offset of the match start.
    pub offset: usize,
}

/// True for canonical CWE identifiers such as `CWE-79`.
pub fn is_cwe_id(s: &str) -> bool {
    CWE_ID.is_match(s)
}

fn normalize_cwe_digits(digits: &str) -> String {
    let trimmed = digits.trim_start_matches('0');
    format!("CWE-{}", if trimmed.is_empty() { "0" } else { trimmed })
}

/// Normalize a single CWE identifier (`cwe-079` → `CWE-79`).
pub fn normalize_cwe(s: &str) -> Option<String> {
    let s = s.trim();
    let (prefix, digits) = s.split_at_checked(4)?;
    if !prefix.eq_ignore_ascii_case("CWE-") || digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(normalize_cwe_digits(digits))
}

/// Normalize a single CVE identifier (`can-2004-0001` → `CVE-2004-0001`).
pub fn normalize_cve(s: &str) -> Option<String> {
    let s = s.trim();
    let m = IDENTIFIER.captures(s)?;
    let whole = m.get(0)?;
    if whole.start() != 0 || whole.end() != s.len() {
        return None;
    }
    m.get(2).map(|rest| format!("CVE-{}", rest.as_str()))
}

/// Every non-overlapping CWE or CVE/CAN identifier in `text`, in order.
/// Prefixes match case-insensitively; `CAN-` is reported as `CVE-`.
pub fn scan_identifiers(text: &str) -> Vec<IdentifierMatch> {
    let mut out = Vec::new();
    let mut chars_before = 0;
    let mut last_byte = 0;
    for caps in IDENTIFIER.captures_iter(text) {
        let whole = caps.get(0).unwrap();
        chars_before += text[last_byte..whole.start()].chars().count();
        last_byte = whole.start();
        let (kind, normalized_id) = match (caps.get(1), caps.get(2)) {
            (Some(digits), _) => (IdentifierKind::Cwe, normalize_cwe_digits(digits.as_str())),
            (None, Some(rest)) => (IdentifierKind::Cve, format!("CVE-{}", rest.as_str())),
            (None, None) => unreachable!("one alternative always matches"),
        };
        out.push(IdentifierMatch {
            kind,
            normalized_id,
            offset: chars_before,
        });
    }
    out
}

/// Distinct identifiers (both kinds combined) found in `text`.
pub fn distinct_identifiers(text: &str) -> BTreeSet<(IdentifierKind, String)> {
    scan_identifiers(text)
        .into_iter()
        .map(|m| (m.kind, m.normalized_id))
        .collect()
}

/// Reduced NVD extract: CVE → CWE, plus rejected CVEs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NvdMapping {
    pub cve_to_cwe: BTreeMap<String, String>,
    pub rejected: BTreeSet<String>,
}

impl NvdMapping {
    /// Parse a `cve_id,cwe_id,status` CSV. `source` names the input in errors.
    pub fn from_reader<R: std::io::Read>(reader: R, source: &Path) -> Result<Self> {
        let parse_error = |line: u64, message: String| Error::MappingParse {
            path: source.to_path_buf(),
            line,
            message,
        };

        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| parse_error(1, e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["cve_id", "cwe_id", "status"] {
            return Err(parse_error(1, format!("expected header cve_id,cwe_id,status, got {:?}", headers.iter().collect::<Vec<_>>())));
        }

        let mut mapping = NvdMapping::default();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_error(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let cve = normalize_cve(&record[0])
                .ok_or_else(|| parse_error(line, format!("not a CVE identifier: {:?}", &record[0])))?;
            let status = &record[2];
            if status.to_ascii_uppercase().contains("REJECTED") {
                mapping.cve_to_cwe.remove(&cve);
                mapping.rejected.insert(cve);
                continue;
            }
            if mapping.rejected.contains(&cve) {
                continue;
            }
            let raw_cwe = &record[1];
            // NVD placeholders (NVD-CWE-Other, NVD-CWE-noinfo) map to no weakness
            if raw_cwe.to_ascii_uppercase().starts_with("NVD-CWE-") {
                continue;
            }
            let cwe = normalize_cwe(raw_cwe)
                .ok_or_else(|| parse_error(line, format!("not a CWE identifier: {raw_cwe:?}")))?;
            match mapping.cve_to_cwe.get(&cve) {
                Some(existing) if *existing != cwe => {
                    return Err(Error::ConflictingMapping {
                        cve,
                        first: existing.clone(),
                        second: cwe,
                    })
                }
                Some(_) => {}
                None => {
                    mapping.cve_to_cwe.insert(cve, cwe);
                }
            }
        }
        Ok(mapping)
    }

    pub fn cwe_for(&self, cve: &str) -> Option<&str> {
        self.cve_to_cwe.get(cve).map(String::as_str)
    }

    pub fn is_rejected(&self, cve: &str) -> bool {
        self.rejected.contains(cve)
    }
}

/// Load the NVD mapping CSV at `path`.
pub fn load_nvd_mapping(path: &Path) -> Result<NvdMapping> {
    let file = std::fs::File::open(path).map_err(|source| Error::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    NvdMapping::from_reader(std::io::BufReader::new(file), path)
}

/// The CWEs NVD actually uses; the only admissible mapping targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllowedCweSet {
    ids: BTreeSet<String>,
}

impl AllowedCweSet {
    pub fn from_ids(ids: impl IntoIterator<Item = String>) -> Result<Self> {
        let ids: BTreeSet<String> = ids.into_iter().collect();
        if ids.is_empty() {
            return Err(Error::EmptyMapping);
        }
        Ok(AllowedCweSet { ids })
    }

    pub fn contains(&self, cwe: &str) -> bool {
        self.ids.contains(cwe)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.ids.iter().map(String::as_str)
    }
}

/// Distinct CWEs in the range of the mapping.
pub fn allowed_cwe_set(mapping: &NvdMapping) -> Result<AllowedCweSet> {
    AllowedCweSet::from_ids(mapping.cve_to_cwe.values().cloned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Route {
    DirectCwe,
    ViaCve,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::DirectCwe => "direct_cwe",
            Route::ViaCve => "via_cve",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthLabel {
    pub vulnerability_id: String,
    pub cwe_id: String,
    pub route: Route,
    pub via_cve: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DisqualifyReason {
    NoMatch,
    MultipleDistinct,
    UnresolvableCve,
    CweNotAllowed,
    RejectedCve,
}

impl fmt::Display for DisqualifyReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DisqualifyReason::NoMatch => "no_match",
            DisqualifyReason::MultipleDistinct => "multiple_distinct",
            DisqualifyReason::UnresolvableCve => "unresolvable_cve",
            DisqualifyReason::CweNotAllowed => "cwe_not_allowed",
            DisqualifyReason::RejectedCve => "rejected_cve",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Qualification {
    Qualified(GroundTruthLabel),
    Disqualified(DisqualifyReason),
}

impl Qualification {
    pub fn label(&self) -> Option<&GroundTruthLabel> {
        match self {
            Qualification::Qualified(label) => Some(label),
            Qualification::Disqualified(_) => None,
        }
    }

    pub fn reason(&self) -> Option<DisqualifyReason> {
        match self {
            Qualification::Qualified(_) => None,
            Qualification::Disqualified(reason) => Some(*reason),
        }
    }
}

/// Apply the exactly-one-distinct-identifier rule to raw text.
pub fn qualify_text(
    vulnerability_id: &str,
    text: &str,
    mapping: &NvdMapping,
    allowed: &AllowedCweSet,
) -> Qualification {
    use Qualification::Disqualified;

    let ids = distinct_identifiers(text);
    let mut iter = ids.into_iter();
    let (kind, id) = match (iter.next(), iter.next()) {
        (None, _) => return Disqualified(DisqualifyReason::NoMatch),
        (Some(_), Some(_)) => return Disqualified(DisqualifyReason::MultipleDistinct),
        (Some(only), None) => only,
    };

    let (cwe_id, route, via_cve) = match kind {
        IdentifierKind::Cwe => (id, Route::DirectCwe, None),
        IdentifierKind::Cve => {
            if mapping.is_rejected(&id) {
                return Disqualified(DisqualifyReason::RejectedCve);
            }
            match mapping.cwe_for(&id) {
                Some(cwe) => (cwe.to_string(), Route::ViaCve, Some(id)),
                None => return Disqualified(DisqualifyReason::UnresolvableCve),
            }
        }
    };
    if !allowed.contains(&cwe_id) {
        return Disqualified(DisqualifyReason::CweNotAllowed);
    }
    Qualification::Qualified(GroundTruthLabel {
        vulnerability_id: vulnerability_id.to_string(),
        cwe_id,
        route,
        via_cve,
    })
}

/// Qualify one vulnerability document over all of its segments and reference URLs.
pub fn qualify(document: &RawDocument, mapping: &NvdMapping, allowed: &AllowedCweSet) -> Qualification {
    qualify_text(&document.id, &document.searchable_text(), mapping, allowed)
}

/// Labels of the estimation subset, keyed by vulnerability id.
pub type LabelMap = BTreeMap<String, GroundTruthLabel>;

/// Qualification outcome of every vulnerability in corpus order.
pub fn qualify_corpus(
    corpus: &Corpus,
    mapping: &NvdMapping,
    allowed: &AllowedCweSet,
) -> Vec<(String, Qualification)> {
    corpus
        .vulnerabilities()
        .map(|(_, doc)| (doc.id.clone(), qualify(doc, mapping, allowed)))
        .collect()
}

/// The estimation subset as a label map.
pub fn estimation_subset(qualifications: &[(String, Qualification)]) -> LabelMap {
    qualifications
        .iter()
        .filter_map(|(id, q)| q.label().map(|l| (id.clone(), l.clone())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PYMONGO: &str = "## Overview\n[`pymongo`](https://pypi.python.org/pypi/pymongo) is a Python driver for\nMongoDB.\n\n`bson/_cbsonmodule.c` in the mongo-python-driver (aka.  pymongo) before\n2.5.2, as used in MongoDB, allows context-dependent attackers to cause a\ndenial of service (NULL pointer dereference and crash) via vectors related\nto decoding of an \"invalid DBRef.\"\n\n## References\n- [NVD](https://web.nvd.nist.gov/view/vuln/detail?vulnId=CVE-2013-2132)\n- [Github Commit](https://github.com/mongodb/mongo-python-driver/commit/\na060c15ef87e0f0e72974c7c0e57fe811bbd06a2)\n";

    fn mapping(rows: &str) -> Result<NvdMapping> {
        NvdMapping::from_reader(rows.as_bytes(), Path::new("test.csv"))
    }

    #[test]
    fn scan_pymongo() {
        let ids = distinct_identifiers(PYMONGO);
        assert_eq!(ids.len(), 1);
        assert_eq!(ids.first().unwrap(), &(IdentifierKind::Cve, "CVE-2013-2132".to_string()));
    }

    #[test]
    fn scan_nothing() {
        assert!(scan_identifiers("no identifiers here").is_empty());
    }

    #[test]
    fn scan_can_and_cwe() {
        let found = scan_identifiers("CAN-2004-0001 fixed; see CWE-79.");
        assert_eq!(
            found,
            vec![
                IdentifierMatch {
                    kind: IdentifierKind::Cve,
                    normalized_id: "CVE-2004-0001".into(),
                    offset: 0
                },
                IdentifierMatch {
                    kind: IdentifierKind::Cwe,
                    normalized_id: "CWE-79".into(),
                    offset: 25
                },
            ]
        );
    }

    #[test]
    fn scan_case_and_shape() {
        let found = scan_identifiers("cve-2013-2132, Cwe-079, CVE-13-1, CVE-2013-123, ünï CWE-");
        let ids: Vec<_> = found.iter().map(|m| m.normalized_id.as_str()).collect();
        assert_eq!(ids, vec!["CVE-2013-2132", "CWE-79"]);
        assert_eq!(found[1].offset, 15);
        let found = scan_identifiers("ünï CWE-20");
        assert_eq!(found[0].offset, 4);
    }

    #[test]
    fn mapping_rows() {
        let m = mapping("cve_id,cwe_id,status\nCVE-2013-2132,CWE-476,OK\n").unwrap();
        assert_eq!(m.cve_to_cwe.len(), 1);
        assert!(m.rejected.is_empty());

        let m = mapping("cve_id,cwe_id,status\nCVE-1999-0001,,REJECTED\n").unwrap();
        assert_eq!(m.rejected.iter().collect::<Vec<_>>(), vec!["CVE-1999-0001"]);
        assert!(m.cve_to_cwe.is_empty());

        let m = mapping("cve_id,cwe_id,status\nCVE-1999-0002,CWE-20,OK\nCVE-1999-0002,CWE-20,** REJECTED **\n").unwrap();
        assert!(m.is_rejected("CVE-1999-0002"));
        assert!(m.cwe_for("CVE-1999-0002").is_none());
    }

    #[test]
    fn conflicting_mapping() {
        let err = mapping("cve_id,cwe_id,status\nCVE-2013-2132,CWE-476,OK\nCVE-2013-2132,CWE-20,OK\n").unwrap_err();
        match err {
            Error::ConflictingMapping { cve, .. } => assert_eq!(cve, "CVE-2013-2132"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = mapping("cve_id,cwe_id,status\nCVE-2013-2132,CWE-476,OK\nbogus,CWE-1,OK\n").unwrap_err();
        assert!(matches!(err, Error::MappingParse { line: 3, .. }), "{err}");
        let err = mapping("cve,cwe\nCVE-2013-2132,CWE-476\n").unwrap_err();
        assert!(matches!(err, Error::MappingParse { line: 1, .. }), "{err}");
        let err = mapping("cve_id,cwe_id,status\nCVE-2013-2132,476,OK\n").unwrap_err();
        assert!(matches!(err, Error::MappingParse { line: 2, .. }), "{err}");
    }

    #[test]
    fn allowed_set_dedups_and_rejects_empty() {
        let m = mapping("cve_id,cwe_id,status\nCVE-2000-0001,CWE-476,\nCVE-2000-0002,CWE-20,\nCVE-2000-0003,CWE-476,\n").unwrap();
        let allowed = allowed_cwe_set(&m).unwrap();
        assert_eq!(allowed.iter().collect::<Vec<_>>(), vec!["CWE-20", "CWE-476"]);
        assert!(matches!(allowed_cwe_set(&NvdMapping::default()), Err(Error::EmptyMapping)));
    }

    fn fixture() -> (NvdMapping, AllowedCweSet) {
        let m = mapping(
            "cve_id,cwe_id,status\nCVE-2013-2132,CWE-476,OK\nCVE-2014-0001,CWE-89,OK\nCVE-2015-0001,CWE-79,OK\nCVE-1999-0001,,REJECTED\n",
        )
        .unwrap();
        let allowed = AllowedCweSet::from_ids(["CWE-476", "CWE-89", "CWE-79", "CWE-20"].map(String::from)).unwrap();
        (m, allowed)
    }

    #[test]
    fn qualify_pymongo_via_cve() {
        let (m, allowed) = fixture();
        let q = qualify_text("pymongo/40183", PYMONGO, &m, &allowed);
        let label = q.label().unwrap();
        assert_eq!(label.cwe_id, "CWE-476");
        assert_eq!(label.route, Route::ViaCve);
        assert_eq!(label.via_cve.as_deref(), Some("CVE-2013-2132"));
    }

    #[test]
    fn qualify_branches() {
        let (m, allowed) = fixture();
        let reason = |t: &str| qualify_text("v", t, &m, &allowed).reason();
        assert_eq!(reason("CVE-2014-0001 and CWE-89"), Some(DisqualifyReason::MultipleDistinct));
        assert_eq!(reason("nothing"), Some(DisqualifyReason::NoMatch));
        assert_eq!(reason("CVE-2099-1234"), Some(DisqualifyReason::UnresolvableCve));
        assert_eq!(reason("CVE-1999-0001"), Some(DisqualifyReason::RejectedCve));
        assert_eq!(reason("CWE-400"), Some(DisqualifyReason::CweNotAllowed));

        let q = qualify_text("v", "CWE-79 ... cwe-79 ... CWE-079", &m, &allowed);
        let label = q.label().unwrap();
        assert_eq!(label.cwe_id, "CWE-79");
        assert_eq!(label.route, Route::DirectCwe);
        assert_eq!(label.via_cve, None);
    }

    proptest! {
        #[test]
        fn duplication_keeps_distinct_set(s in "[a-zA-Z0-9 ,.-]{0,80}", id in prop::sample::select(vec!["CVE-2013-2132", "CWE-79", "can-2001-12345"])) {
            let text = format!("{s} {id} {s}");
            let doubled = format!("{text}\n{text}");
            prop_assert_eq!(distinct_identifiers(&text), distinct_identifiers(&doubled));
        }

        #[test]
        fn labels_always_allowed(s in "(CWE-[0-9]{1,3}|CVE-20(13|14|15)-[0-9]{4}| |x){0,6}") {
            let (m, allowed) = fixture();
            if let Some(label) = qualify_text("v", &s, &m, &allowed).label() {
                prop_assert!(allowed.contains(&label.cwe_id));
            }
        }
    }
}
