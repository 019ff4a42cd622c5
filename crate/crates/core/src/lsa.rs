//! Latent semantic analysis on the document-by-document similarity matrix.
//!
//! The matrix is decomposed as U·S·Vᵀ, singular values at or below a
//! threshold are zeroed, and the matrix is rebuilt from the reduced spectrum.
//! Similarity matrices are symmetric, so the decomposition comes from a
//! symmetric eigendecomposition: singular values are |λ|, U holds the
//! eigenvectors and V the same vectors with the sign of λ.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// Singular values ≤ this are zeroed unless configured otherwise.
pub const DEFAULT_THRESHOLD: f64 = 1.0;

/// Largest tolerated |m_ab − m_ba|, relative to max(1, max |m|).
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionPolicy {
    threshold: f64,
}

impl ReductionPolicy {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(Error::Config(format!("LSA threshold must be finite and ≥ 0, got {threshold}")));
        }
        Ok(ReductionPolicy { threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

impl Default for ReductionPolicy {
    fn default() -> Self {
        ReductionPolicy {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DMatrix<f64>,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl SvdResult {
    /// U·diag(s)·Vᵀ for a replacement spectrum `s`; zero entries are skipped.
    pub fn reconstruct(&self, s: &[f64]) -> DMatrix<f64> {
        let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] != 0.0).collect();
        let n = self.u.nrows();
        if keep.is_empty() {
            return DMatrix::zeros(n, self.v.nrows());
        }
        let us = DMatrix::from_fn(n, keep.len(), |r, c| self.u[(r, keep[c])] * s[keep[c]]);
        let v = DMatrix::from_fn(self.v.nrows(), keep.len(), |r, c| self.v[(r, keep[c])]);
        us * v.transpose()
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSymmetric(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let n = m.nrows();
    for a in 0..n {
        for b in (a + 1)..n {
            let gap = (m[(a, b)] - m[(b, a)]).abs();
            if gap > SYMMETRY_TOLERANCE * scale || gap.is_nan() {
                return Err(Error::NotSymmetric(format!("entries ({a},{b}) differ by {gap:e}")));
            }
        }
    }
    Ok(())
}

/// Index sets of the connected components of the nonzero pattern of `m`,
/// each sorted, ordered by smallest member.
pub fn components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if m[(a, b)] != 0.0 || m[(b, a)] != 0.0 {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Singular value decomposition of a symmetric matrix.
///
/// Each connected block of the nonzero pattern is decomposed on its own, so
/// documents that share nothing with a block get exact zeros in its
/// singular vectors.
pub fn svd(m: &DMatrix<f64>) -> Result<SvdResult> {
    check_symmetric(m)?;
    let n = m.nrows();
    let symmetric = (m + m.transpose()) * 0.5;

    let mut pairs: Vec<(f64, Vec<(usize, f64)>)> = Vec::with_capacity(n);
    for block in components(&symmetric) {
        let sub = DMatrix::from_fn(block.len(), block.len(), |r, c| symmetric[(block[r], block[c])]);
        let eigen = SymmetricEigen::new(sub);
        for i in 0..block.len() {
            let vector = block
                .iter()
                .enumerate()
                .map(|(r, &row)| (row, eigen.eigenvectors[(r, i)]))
                .collect();
            pairs.push((eigen.eigenvalues[i], vector));
        }
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[b].0.abs().total_cmp(&pairs[a].0.abs()).then(a.cmp(&b)));

    let mut u = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (col, &i) in order.iter().enumerate() {
        let (lambda, vector) = &pairs[i];
        let sign = if *lambda < 0.0 { -1.0 } else { 1.0 };
        for &(row, x) in vector {
            u[(row, col)] = x;
            v[(row, col)] = x * sign;
        }
        singular_values.push(lambda.abs());
    }
    Ok(SvdResult { u, singular_values, v })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduction {
    /// The spectrum after zeroing.
    pub singular_values: Vec<f64>,
    pub zeroed: Vec<bool>,
}

impl Reduction {
    pub fn zeroed_count(&self) -> usize {
        self.zeroed.iter().filter(|&&z| z).count()
    }

    pub fn zeroed_fraction(&self) -> f64 {
        if self.zeroed.is_empty() {
            0.0
        } else {
            self.zeroed_count() as f64 / self.zeroed.len() as f64
        }
    }
}

/// Zero every singular value ≤ the policy threshold.
pub fn reduce(singular_values: &[f64], policy: &ReductionPolicy) -> Reduction {
    let zeroed: Vec<bool> = singular_values.iter().map(|&s| s <= policy.threshold).collect();
    let reduced = singular_values
        .iter()
        .zip(&zeroed)
        .map(|(&s, &z)| if z { 0.0 } else { s })
        .collect();
    Reduction {
        singular_values: reduced,
        zeroed,
    }
}

#[derive(Debug, Clone)]
pub struct LsaOutput {
    pub matrix: SimilarityMatrix,
    /// Spectrum before reduction.
    pub spectrum: Vec<f64>,
    pub reduction: Reduction,
}

/// Decompose, reduce and rebuild a similarity matrix. Labels are preserved
/// and the result is used unclamped.
pub fn lsa_pipeline(similarity: &SimilarityMatrix, policy: &ReductionPolicy) -> Result<LsaOutput> {
    let decomposition = svd(similarity.values())?;
    let reduction = reduce(&decomposition.singular_values, policy);
    let rebuilt = decomposition.reconstruct(&reduction.singular_values);
    Ok(LsaOutput {
        matrix: SimilarityMatrix::new(similarity.ids().to_vec(), rebuilt)?,
        spectrum: decomposition.singular_values,
        reduction,
    })
}
