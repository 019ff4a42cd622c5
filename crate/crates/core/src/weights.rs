//! The five k-gram weighting schemes.
//!
//! With f the count of gram j in document i, N the number of documents,
//! ñ_j the number of documents containing gram j, L_i the document length and
//! L̄ the mean length:
//!
//! | scheme  | weight                                                   |
//! |---------|----------------------------------------------------------|
//! | TF      | f                                                        |
//! | TF-LOG  | ln(f + 1)                                                |
//! | TF-BOOL | 1 if f > 0                                               |
//! | TF-IDF  | f · ω,  ω = ln((N + 1) / (ñ + 1)) + 1                    |
//! | DLM-IDF | (1 + ln(f + 1)) / ((1 − β) + β · L_i / L̄) · ω           |
//!
//! Zero counts always give zero weight, so every matrix shares the sparsity
//! pattern of the counts.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{CountMatrix, DocumentTermCounts};

/// Pivot used by DLM-IDF unless configured otherwise.
pub const DEFAULT_BETA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeightScheme {
    #[serde(rename = "TF")]
    Tf,
    #[serde(rename = "TF-LOG")]
    TfLog,
    #[serde(rename = "TF-BOOL")]
    TfBool,
    #[serde(rename = "TF-IDF")]
    TfIdf,
    #[serde(rename = "DLM-IDF")]
    DlmIdf,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 5] = [
        WeightScheme::Tf,
        WeightScheme::TfLog,
        WeightScheme::TfBool,
        WeightScheme::TfIdf,
        WeightScheme::DlmIdf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::Tf => "TF",
            WeightScheme::TfLog => "TF-LOG",
            WeightScheme::TfBool => "TF-BOOL",
            WeightScheme::TfIdf => "TF-IDF",
            WeightScheme::DlmIdf => "DLM-IDF",
        }
    }

    /// Lowercase form used in file names.
    pub fn slug(self) -> &'static str {
        match self {
            WeightScheme::Tf => "tf",
            WeightScheme::TfLog => "tf-log",
            WeightScheme::TfBool => "tf-bool",
            WeightScheme::TfIdf => "tf-idf",
            WeightScheme::DlmIdf => "dlm-idf",
        }
    }

    pub fn uses_idf(self) -> bool {
        matches!(self, WeightScheme::TfIdf | WeightScheme::DlmIdf)
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('_', "-");
        WeightScheme::ALL
            .into_iter()
            .find(|w| w.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown weighting scheme {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    /// N = n1 + n2.
    pub n_docs: usize,
    /// ñ_j per column.
    pub doc_freq: Vec<u64>,
    /// L_i per row.
    pub lengths: Vec<u64>,
    /// L̄.
    pub avg_length: f64,
    pub beta: f64,
}

impl CorpusStats {
    /// Smoothed inverse document frequency ω_j.
    pub fn idf(&self, column: usize) -> f64 {
        idf(self.n_docs, self.doc_freq[column])
    }
}

/// ω = ln((N + 1) / (ñ + 1)) + 1.
pub fn idf(n_docs: usize, doc_freq: u64) -> f64 {
    ((n_docs as f64 + 1.0) / (doc_freq as f64 + 1.0)).ln() + 1.0
}

pub fn compute_stats(counts: &CountMatrix, beta: f64) -> Result<CorpusStats> {
    let n_docs = counts.rows.len();
    if n_docs == 0 {
        return Err(Error::EmptyCorpus);
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::Config(format!("beta must lie in [0, 1), got {beta}")));
    }
    let mut doc_freq = vec![0u64; counts.n_cols];
    for row in &counts.rows {
        for &(j, _) in &row.counts {
            doc_freq[j] += 1;
        }
    }
    let lengths: Vec<u64> = counts.rows.iter().map(|r| r.length).collect();
    let avg_length = lengths.iter().sum::<u64>() as f64 / n_docs as f64;
    if avg_length <= 0.0 {
        return Err(Error::EmptyVocabulary(counts.k));
    }
    Ok(CorpusStats {
        n_docs,
        doc_freq,
        lengths,
        avg_length,
        beta,
    })
}

/// Sparse document-by-gram weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightMatrix {
    pub k: usize,
    pub scheme: WeightScheme,
    pub doc_ids: Vec<String>,
    pub n_cols: usize,
    /// Per row, (column, weight) sorted by column; weights are finite and > 0.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl WeightMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, row: usize, column: usize) -> f64 {
        let r = &self.rows[row];
        r.binary_search_by_key(&column, |&(j, _)| j)
            .map_or(0.0, |pos| r[pos].1)
    }

    /// Copy with one row multiplied by `factor`.
    pub fn with_scaled_row(&self, row: usize, factor: f64) -> WeightMatrix {
        let mut scaled = self.clone();
        for entry in &mut scaled.rows[row] {
            entry.1 *= factor;
        }
        scaled
    }
}

/// Weight of a single count under `scheme`.
pub fn weight(scheme: WeightScheme, count: u64, idf: f64, length: u64, avg_length: f64, beta: f64) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let f = count as f64;
    match scheme {
        WeightScheme::Tf => f,
        WeightScheme::TfLog => (f + 1.0).ln(),
        WeightScheme::TfBool => 1.0,
        WeightScheme::TfIdf => f * idf,
        WeightScheme::DlmIdf => {
            let pivot = (1.0 - beta) + beta * (length as f64 / avg_length);
            (1.0 + (f + 1.0).ln()) / pivot * idf
        }
    }
}

fn weigh_row(row: &DocumentTermCounts, stats: &CorpusStats, scheme: WeightScheme) -> Vec<(usize, f64)> {
    row.counts
        .iter()
        .map(|&(j, f)| {
            let idf = if scheme.uses_idf() { stats.idf(j) } else { 1.0 };
            (j, weight(scheme, f, idf, row.length, stats.avg_length, stats.beta))
        })
        .collect()
}

pub fn weigh(counts: &CountMatrix, stats: &CorpusStats, scheme: WeightScheme) -> WeightMatrix {
    let rows = counts
        .rows
        .par_iter()
        .map(|row| weigh_row(row, stats, scheme))
        .collect();
    WeightMatrix {
        k: counts.k,
        scheme,
        doc_ids: counts.doc_ids.clone(),
        n_cols: counts.n_cols,
        rows,
    }
}
