//! Document similarities and the vulnerability → weakness argmax mapping.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DocumentKind};
use crate::error::{Error, Result};
use crate::groundtruth::LabelMap;
use crate::weights::WeightMatrix;

/// Two row entries tie when they are within this fraction of the row maximum.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Square document-by-document matrix labeled with document ids.
///
/// Cosine and Jaccard matrices are symmetric with entries in [0, 1]; a matrix
/// reconstructed by LSA may leave that range.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    values: DMatrix<f64>,
}

impl SimilarityMatrix {
    pub fn new(ids: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() || values.nrows() != ids.len() {
            return Err(Error::NotSymmetric(format!(
                "{}x{} values for {} labels",
                values.nrows(),
                values.ncols(),
                ids.len()
            )));
        }
        Ok(SimilarityMatrix { ids, values })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.ids.len()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[(a, b)]
    }

    /// Restrict to the given rows and columns, in the given order.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| self.values[(rows[r], cols[c])])
    }
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

fn symmetric_from_upper(n: usize, entry: impl Fn(usize, usize) -> f64 + Sync) -> DMatrix<f64> {
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|a| (a..n).map(|b| entry(a, b)).collect())
        .collect();
    let mut values = DMatrix::zeros(n, n);
    for (a, row) in upper.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let b = a + offset;
            values[(a, b)] = v;
            values[(b, a)] = v;
        }
    }
    values
}

/// Cosine similarity of every pair of weight rows. Zero rows are 0 against
/// everything, themselves included; other diagonal entries are exactly 1.
pub fn cosine_matrix(weights: &WeightMatrix) -> SimilarityMatrix {
    let rows = &weights.rows;
    let norms: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt())
        .collect();
    let values = symmetric_from_upper(rows.len(), |a, b| {
        if norms[a] == 0.0 || norms[b] == 0.0 {
            0.0
        } else if a == b {
            1.0
        } else {
            sparse_dot(&rows[a], &rows[b]) / (norms[a] * norms[b])
        }
    });
    SimilarityMatrix {
        ids: weights.doc_ids.clone(),
        values,
    }
}

/// Jaccard similarity of the rows' supports; two empty supports give 0.
pub fn jaccard_matrix(weights: &WeightMatrix) -> SimilarityMatrix {
    let rows = &weights.rows;
    let values = symmetric_from_upper(rows.len(), |a, b| {
        let (x, y) = (&rows[a], &rows[b]);
        let (mut i, mut j, mut common) = (0, 0, 0usize);
        while i < x.len() && j < y.len() {
            match x[i].0.cmp(&y[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = x.len() + y.len() - common;
        if union == 0 {
            0.0
        } else {
            common as f64 / union as f64
        }
    });
    SimilarityMatrix {
        ids: weights.doc_ids.clone(),
        values,
    }
}

/// The n2 × n1 vulnerability-by-weakness block of a similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingMatrix {
    pub vulnerability_ids: Vec<String>,
    pub weakness_ids: Vec<String>,
    pub values: DMatrix<f64>,
}

impl MappingMatrix {
    pub fn row(&self, r: usize) -> Vec<f64> {
        self.values.row(r).iter().copied().collect()
    }
}

pub fn extract_vuln_by_weakness(similarity: &SimilarityMatrix, corpus: &Corpus) -> Result<MappingMatrix> {
    if similarity.ids().len() != corpus.len()
        || similarity.ids().iter().zip(corpus.documents()).any(|(a, d)| *a != d.id)
    {
        return Err(Error::LabelMismatch);
    }
    let pick = |kind: DocumentKind| -> Vec<usize> {
        corpus
            .documents()
            .iter()
            .enumerate()
            .filter(|(_, d)| d.kind == kind)
            .map(|(i, _)| i)
            .collect()
    };
    let rows = pick(DocumentKind::Vulnerability);
    let cols = pick(DocumentKind::Weakness);
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::MissingDocumentClass {
            weaknesses: cols.len(),
            vulnerabilities: rows.len(),
        });
    }
    let ids = similarity.ids();
    Ok(MappingMatrix {
        vulnerability_ids: rows.iter().map(|&i| ids[i].clone()).collect(),
        weakness_ids: cols.iter().map(|&i| ids[i].clone()).collect(),
        values: similarity.restrict(&rows, &cols),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TieResolution {
    None,
    GroundTruthPreference,
    LowestCweId,
}

impl TieResolution {
    pub fn as_str(self) -> &'static str {
        match self {
            TieResolution::None => "none",
            TieResolution::GroundTruthPreference => "ground_truth",
            TieResolution::LowestCweId => "lowest_cwe_id",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(TieResolution::None),
            "ground_truth" => Some(TieResolution::GroundTruthPreference),
            "lowest_cwe_id" => Some(TieResolution::LowestCweId),
            _ => None,
        }
    }
}

impl fmt::Display for TieResolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnMapping {
    pub vulnerability_id: String,
    /// `None` when the similarity row is all zeros.
    pub predicted_cwe: Option<String>,
    pub score: f64,
    pub tied: bool,
    pub tie_resolved_by: TieResolution,
}

/// Order CWE ids by their number, falling back to text for malformed ids.
pub fn cwe_order(a: &str, b: &str) -> Ordering {
    let num = |s: &str| s.strip_prefix("CWE-").and_then(|d| d.parse::<u64>().ok());
    match (num(a), num(b)) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

/// Columns attaining the row maximum (within [`TIE_TOLERANCE`]), or `None`
/// for an all-zero row.
pub fn argmax_set(row: &[f64]) -> Option<(f64, Vec<usize>)> {
    if row.iter().all(|&v| v == 0.0) {
        return None;
    }
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = TIE_TOLERANCE * max.abs();
    let tied = row
        .iter()
        .enumerate()
        .filter(|&(_, &v)| max - v <= slack)
        .map(|(j, _)| j)
        .collect();
    Some((max, tied))
}

/// Map each vulnerability to the weakness with the highest similarity.
///
/// Ties go to the ground-truth CWE when it is among the tied weaknesses,
/// otherwise to the lowest CWE number.
pub fn map_vulnerabilities(matrix: &MappingMatrix, labels: &LabelMap) -> Vec<VulnMapping> {
    (0..matrix.vulnerability_ids.len())
        .map(|r| {
            let vulnerability_id = matrix.vulnerability_ids[r].clone();
            let row = matrix.row(r);
            let Some((score, tied)) = argmax_set(&row) else {
                return VulnMapping {
                    vulnerability_id,
                    predicted_cwe: None,
                    score: 0.0,
                    tied: false,
                    tie_resolved_by: TieResolution::None,
                };
            };
            let candidates: Vec<&str> = tied.iter().map(|&j| matrix.weakness_ids[j].as_str()).collect();
            let (predicted, resolution) = if candidates.len() == 1 {
                (candidates[0], TieResolution::None)
            } else {
                let truth = labels.get(&vulnerability_id).map(|l| l.cwe_id.as_str());
                match truth.filter(|t| candidates.contains(t)) {
                    Some(t) => (t, TieResolution::GroundTruthPreference),
                    None => (
                        candidates.iter().copied().min_by(|a, b| cwe_order(a, b)).unwrap(),
                        TieResolution::LowestCweId,
                    ),
                }
            };
            VulnMapping {
                vulnerability_id,
                predicted_cwe: Some(predicted.to_string()),
                score,
                tied: candidates.len() > 1,
                tie_resolved_by: resolution,
            }
        })
        .collect()
}
