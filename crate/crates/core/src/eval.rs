//! Precision, per-repository breakdowns, descriptive statistics and the
//! similarity summaries used for plotting.
//!
//! Precision is `same / (same + different)` over labeled vulnerabilities.
//! Unmappable vulnerabilities count as different, and a cell with no
//! labeled vulnerabilities has no precision at all (rendered as `NA`).

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::corpus::{Corpus, DocumentKind, Repository};
use crate::groundtruth::LabelMap;
use crate::preprocess::{CountMatrix, Vocabulary};
use crate::similarity::{MappingMatrix, SimilarityMatrix, VulnMapping};
use crate::weights::WeightScheme;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PrecisionCounts {
    pub same: u64,
    pub different: u64,
}

impl PrecisionCounts {
    pub fn record(&mut self, agree: bool) {
        if agree {
            self.same += 1;
        } else {
            self.different += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.same + self.different
    }

    /// `None` when no vulnerability was counted.
    pub fn precision(&self) -> Option<f64> {
        match self.total() {
            0 => None,
            n => Some(self.same as f64 / n as f64),
        }
    }
}

impl std::ops::Add for PrecisionCounts {
    type Output = PrecisionCounts;

    fn add(self, other: PrecisionCounts) -> PrecisionCounts {
        PrecisionCounts {
            same: self.same + other.same,
            different: self.different + other.different,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RepositoryScope {
    Repository(Repository),
    All,
}

impl RepositoryScope {
    /// The four package repositories followed by the aggregate.
    pub fn report_order() -> Vec<RepositoryScope> {
        Repository::PACKAGE_REPOSITORIES
            .iter()
            .map(|&r| RepositoryScope::Repository(r))
            .chain([RepositoryScope::All])
            .collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RepositoryScope::Repository(r) => r.as_str(),
            RepositoryScope::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if s == "all" {
            Some(RepositoryScope::All)
        } else {
            Repository::parse(s).map(RepositoryScope::Repository)
        }
    }
}

impl fmt::Display for RepositoryScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionCell {
    pub scheme: WeightScheme,
    pub k: usize,
    pub lsa: bool,
    pub repository: RepositoryScope,
    pub counts: PrecisionCounts,
}

impl PrecisionCell {
    pub fn precision(&self) -> Option<f64> {
        self.counts.precision()
    }
}

/// Whether a mapping agrees with its label; `None` for unlabeled vulnerabilities.
pub fn agreement(mapping: &VulnMapping, labels: &LabelMap) -> Option<bool> {
    let label = labels.get(&mapping.vulnerability_id)?;
    Some(mapping.predicted_cwe.as_deref() == Some(label.cwe_id.as_str()))
}

/// Counts over the labeled vulnerabilities among `mappings`.
pub fn precision(mappings: &[VulnMapping], labels: &LabelMap) -> PrecisionCounts {
    let mut counts = PrecisionCounts::default();
    for agree in mappings.iter().filter_map(|m| agreement(m, labels)) {
        counts.record(agree);
    }
    counts
}

/// Tally (repository, agree) observations into the four repositories plus
/// the aggregate, in [`RepositoryScope::report_order`].
pub fn tally_by_repository(
    observations: impl IntoIterator<Item = (Repository, bool)>,
) -> Vec<(RepositoryScope, PrecisionCounts)> {
    let scopes = RepositoryScope::report_order();
    let mut counts = vec![PrecisionCounts::default(); scopes.len()];
    for (repository, agree) in observations {
        if let Some(pos) = scopes.iter().position(|s| *s == RepositoryScope::Repository(repository)) {
            counts[pos].record(agree);
        }
    }
    let all = counts.iter().fold(PrecisionCounts::default(), |acc, &c| acc + c);
    *counts.last_mut().unwrap() = all;
    scopes.into_iter().zip(counts).collect()
}

/// One cell per package repository plus the `all` aggregate.
pub fn per_repository_precision(
    mappings: &[VulnMapping],
    labels: &LabelMap,
    corpus: &Corpus,
    scheme: WeightScheme,
    k: usize,
    lsa: bool,
) -> Vec<PrecisionCell> {
    let observations = mappings.iter().filter_map(|m| {
        let agree = agreement(m, labels)?;
        let repository = corpus.get(&m.vulnerability_id)?.repository;
        Some((repository, agree))
    });
    tally_by_repository(observations)
        .into_iter()
        .map(|(repository, counts)| PrecisionCell {
            scheme,
            k,
            lsa,
            repository,
            counts,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub k: usize,
    /// Vocabulary size m_k.
    pub unique_grams: usize,
    pub avg_length: f64,
    pub avg_weakness_length: f64,
    pub avg_vulnerability_length: f64,
}

fn mean(values: impl Iterator<Item = u64>) -> f64 {
    let (sum, n) = values.fold((0u64, 0u64), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

pub fn descriptive_stats(corpus: &Corpus, vocabulary: &Vocabulary, counts: &CountMatrix) -> DescriptiveStats {
    let lengths = |kind: Option<DocumentKind>| {
        corpus
            .documents()
            .iter()
            .zip(&counts.rows)
            .filter(move |(d, _)| kind.is_none_or(|k| d.kind == k))
            .map(|(_, r)| r.length)
    };
    DescriptiveStats {
        k: vocabulary.k(),
        unique_grams: vocabulary.len(),
        avg_length: mean(lengths(None)),
        avg_weakness_length: mean(lengths(Some(DocumentKind::Weakness))),
        avg_vulnerability_length: mean(lengths(Some(DocumentKind::Vulnerability))),
    }
}

/// Row maxima of the mapping matrix, in row order.
pub fn similarity_distribution(matrix: &MappingMatrix) -> Vec<(String, f64)> {
    matrix
        .vulnerability_ids
        .iter()
        .enumerate()
        .map(|(r, id)| {
            let row = matrix.values.row(r);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (id.clone(), if max.is_finite() { max } else { 0.0 })
        })
        .collect()
}

/// The weakness-by-weakness block of a similarity matrix, labeled by CWE id.
pub fn weakness_similarity_grid(similarity: &SimilarityMatrix, corpus: &Corpus) -> (Vec<String>, DMatrix<f64>) {
    let (indices, ids): (Vec<usize>, Vec<String>) = corpus.weaknesses().map(|(i, d)| (i, d.id.clone())).unzip();
    (ids, similarity.restrict(&indices, &indices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{RawDocument, SegmentOrigin, TextSegment};
    use crate::groundtruth::{GroundTruthLabel, Route};
    use crate::preprocess::DocumentTermCounts;
    use crate::similarity::TieResolution;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn mapping(id: &str, predicted: Option<&str>) -> VulnMapping {
        VulnMapping {
            vulnerability_id: id.into(),
            predicted_cwe: predicted.map(String::from),
            score: if predicted.is_some() { 0.5 } else { 0.0 },
            tied: false,
            tie_resolved_by: TieResolution::None,
        }
    }

    fn labels(pairs: &[(&str, &str)]) -> LabelMap {
        pairs
            .iter()
            .map(|&(v, c)| {
                (
                    v.to_string(),
                    GroundTruthLabel {
                        vulnerability_id: v.into(),
                        cwe_id: c.into(),
                        route: Route::DirectCwe,
                        via_cve: None,
                    },
                )
            })
            .collect()
    }

    fn doc(id: &str, kind: DocumentKind, repository: Repository) -> RawDocument {
        RawDocument {
            id: id.into(),
            kind,
            repository,
            segments: vec![TextSegment {
                origin: SegmentOrigin::SecondOrder,
                content: "text".into(),
                source_label: String::new(),
            }],
            references: vec![],
        }
    }

    #[test]
    fn all_agree() {
        let l = labels(&[("a", "CWE-1"), ("b", "CWE-2"), ("c", "CWE-3"), ("d", "CWE-4")]);
        let m: Vec<_> = l.iter().map(|(v, g)| mapping(v, Some(&g.cwe_id))).collect();
        assert_eq!(precision(&m, &l).precision(), Some(1.0));
    }

    #[test]
    fn three_of_four() {
        let l = labels(&[("a", "CWE-1"), ("b", "CWE-2"), ("c", "CWE-3"), ("d", "CWE-4")]);
        let m = vec![
            mapping("a", Some("CWE-1")),
            mapping("b", Some("CWE-2")),
            mapping("c", Some("CWE-3")),
            mapping("d", None),
        ];
        let counts = precision(&m, &l);
        assert_eq!((counts.same, counts.different), (3, 1));
        assert_eq!(counts.precision(), Some(0.75));
    }

    #[test]
    fn unlabeled_ignored_and_empty_is_undefined() {
        let m = vec![mapping("x", Some("CWE-1"))];
        assert_eq!(precision(&m, &LabelMap::new()).precision(), None);
    }

    #[test]
    fn additivity_across_repositories() {
        let corpus = Corpus::new(vec![
            doc("CWE-1", DocumentKind::Weakness, Repository::None),
            doc("a", DocumentKind::Vulnerability, Repository::Npm),
            doc("b", DocumentKind::Vulnerability, Repository::Npm),
            doc("c", DocumentKind::Vulnerability, Repository::Pip),
            doc("d", DocumentKind::Vulnerability, Repository::Pip),
            doc("e", DocumentKind::Vulnerability, Repository::Pip),
            doc("f", DocumentKind::Vulnerability, Repository::Pip),
        ])
        .unwrap();
        let l = labels(&[("a", "CWE-1"), ("b", "CWE-1"), ("c", "CWE-1"), ("d", "CWE-1"), ("e", "CWE-1"), ("f", "CWE-1")]);
        let m = vec![
            mapping("a", Some("CWE-1")),
            mapping("b", Some("CWE-2")),
            mapping("c", Some("CWE-1")),
            mapping("d", Some("CWE-1")),
            mapping("e", Some("CWE-1")),
            mapping("f", None),
        ];
        let cells = per_repository_precision(&m, &l, &corpus, WeightScheme::TfIdf, 1, false);
        let get = |s: RepositoryScope| cells.iter().find(|c| c.repository == s).unwrap();
        assert_eq!(get(RepositoryScope::Repository(Repository::Npm)).precision(), Some(0.5));
        assert_eq!(get(RepositoryScope::Repository(Repository::Pip)).precision(), Some(0.75));
        assert_eq!(get(RepositoryScope::Repository(Repository::Maven)).precision(), None);
        assert_eq!(get(RepositoryScope::All).counts, PrecisionCounts { same: 4, different: 2 });
        assert_eq!(cells.len(), 5);
    }

    #[test]
    fn mean_length() {
        let corpus = Corpus::new(vec![
            doc("CWE-1", DocumentKind::Weakness, Repository::None),
            doc("a", DocumentKind::Vulnerability, Repository::Npm),
        ])
        .unwrap();
        let vocab = Vocabulary::from_totals(1, BTreeMap::from([("x".to_string(), 40)])).unwrap();
        let counts = CountMatrix {
            k: 1,
            doc_ids: corpus.ids(),
            n_cols: 1,
            rows: vec![
                DocumentTermCounts::from_map(0, BTreeMap::from([(0, 10)])),
                DocumentTermCounts::from_map(1, BTreeMap::from([(0, 30)])),
            ],
        };
        let stats = descriptive_stats(&corpus, &vocab, &counts);
        assert_eq!(stats.avg_length, 20.0);
        assert_eq!(stats.avg_weakness_length, 10.0);
        assert_eq!(stats.avg_vulnerability_length, 30.0);
        assert_eq!(stats.unique_grams, 1);
    }

    #[test]
    fn row_maxima() {
        let m = MappingMatrix {
            vulnerability_ids: vec!["a".into(), "b".into()],
            weakness_ids: vec!["CWE-1".into(), "CWE-2".into(), "CWE-3".into()],
            values: DMatrix::from_row_slice(2, 3, &[0.1, 0.4, 0.2, 0.0, 0.0, 0.0]),
        };
        assert_eq!(similarity_distribution(&m), vec![("a".to_string(), 0.4), ("b".to_string(), 0.0)]);
    }

    #[test]
    fn weakness_grid_is_symmetric_with_unit_diagonal() {
        let corpus = Corpus::new(vec![
            doc("CWE-1", DocumentKind::Weakness, Repository::None),
            doc("a", DocumentKind::Vulnerability, Repository::Npm),
            doc("CWE-2", DocumentKind::Weakness, Repository::None),
        ])
        .unwrap();
        let values = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.3, 0.2, 1.0, 0.4, 0.3, 0.4, 1.0]);
        let c = SimilarityMatrix::new(corpus.ids(), values).unwrap();
        let (ids, grid) = weakness_similarity_grid(&c, &corpus);
        assert_eq!(ids, vec!["CWE-1", "CWE-2"]);
        assert_eq!(grid, DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]));
    }

    proptest! {
        #[test]
        fn aggregate_is_sum(obs in prop::collection::vec((0usize..4, any::<bool>()), 0..60)) {
            let repos = Repository::PACKAGE_REPOSITORIES;
            let table = tally_by_repository(obs.iter().map(|&(r, a)| (repos[r], a)));
            let (all_scope, all) = table.last().unwrap();
            prop_assert_eq!(*all_scope, RepositoryScope::All);
            let sum = table[..4].iter().fold(PrecisionCounts::default(), |acc, (_, c)| acc + *c);
            prop_assert_eq!(*all, sum);
            for (_, c) in &table {
                if let Some(p) = c.precision() {
                    prop_assert!((0.0..=1.0).contains(&p));
                    prop_assert_eq!(p == 1.0, c.different == 0 && c.same > 0);
                }
            }
        }
    }
}
