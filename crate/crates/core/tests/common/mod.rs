//! Brute-force reference implementations used to check the library.
//!
//! Everything here is dense and naive on purpose: plain loops over full
//! matrices, no sparsity, no parallelism. Only corpus loading, qualification
//! and the Porter stemmer are taken from the library; each has its own tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use vulnmap::corpus::{Corpus, DocumentKind};
use vulnmap::preprocess::porter_stem;

pub const BETA: f64 = 0.2;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn stop_words() -> HashSet<String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/stopwords_en.txt");
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

/// Lowercase, cut at every non-alphanumeric character, keep alphabetic
/// pieces of 3 to 20 characters that are not stop words, stem.
pub fn segment_stems(text: &str, stops: &HashSet<String>) -> Vec<String> {
    let mut pieces = Vec::new();
    let mut current = String::new();
    for c in text.to_lowercase().chars() {
        if c.is_alphanumeric() {
            current.push(c);
        } else if !current.is_empty() {
            pieces.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        pieces.push(current);
    }
    pieces
        .into_iter()
        .filter(|p| {
            let n = p.chars().count();
            (3..=20).contains(&n) && p.chars().all(|c| c.is_alphabetic()) && !stops.contains(p)
        })
        .map(|p| porter_stem(&p))
        .collect()
}

pub fn grams(stems: &[String], k: usize) -> Vec<String> {
    let mut out = Vec::new();
    if stems.len() >= k {
        for start in 0..=(stems.len() - k) {
            out.push(stems[start..start + k].join(" "));
        }
    }
    out
}

/// Grams of every document, segment by segment.
pub fn document_grams(corpus: &Corpus, k: usize, stops: &HashSet<String>) -> Vec<Vec<String>> {
    corpus
        .documents()
        .iter()
        .map(|d| {
            d.segments
                .iter()
                .flat_map(|s| grams(&segment_stems(&s.content, stops), k))
                .collect()
        })
        .collect()
}

/// Sorted vocabulary (grams occurring more than twice in total) and dense counts.
pub fn dense_counts(doc_grams: &[Vec<String>]) -> (Vec<String>, Vec<Vec<u64>>) {
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in doc_grams {
        for g in doc {
            *totals.entry(g.as_str()).or_default() += 1;
        }
    }
    let vocab: Vec<String> = totals
        .iter()
        .filter(|(_, &c)| c > 2)
        .map(|(g, _)| g.to_string())
        .collect();
    let counts = doc_grams
        .iter()
        .map(|doc| {
            vocab
                .iter()
                .map(|v| doc.iter().filter(|g| *g == v).count() as u64)
                .collect()
        })
        .collect();
    (vocab, counts)
}

/// Dense weights of every scheme by name ("TF", "TF-LOG", "TF-BOOL", "TF-IDF", "DLM-IDF").
pub fn dense_weights(counts: &[Vec<u64>], scheme: &str, beta: f64) -> Vec<Vec<f64>> {
    let n = counts.len();
    let m = counts.first().map_or(0, Vec::len);
    let lengths: Vec<f64> = counts.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let avg = lengths.iter().sum::<f64>() / n as f64;
    let mut df = vec![0u64; m];
    for row in counts {
        for j in 0..m {
            if row[j] > 0 {
                df[j] += 1;
            }
        }
    }
    let omega: Vec<f64> = df
        .iter()
        .map(|&d| (((n + 1) as f64) / ((d + 1) as f64)).ln() + 1.0)
        .collect();
    counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            (0..m)
                .map(|j| {
                    let f = row[j] as f64;
                    if row[j] == 0 {
                        return 0.0;
                    }
                    match scheme {
                        "TF" => f,
                        "TF-LOG" => (1.0 + f).ln(),
                        "TF-BOOL" => 1.0,
                        "TF-IDF" => f * omega[j],
                        "DLM-IDF" => (1.0 + (1.0 + f).ln()) / (1.0 - beta + beta * lengths[i] / avg) * omega[j],
                        other => panic!("unknown scheme {other}"),
                    }
                })
                .collect()
        })
        .collect()
}

pub fn dense_cosine(w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = w.len();
    let norm = |r: &Vec<f64>| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut c = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let (na, nb) = (norm(&w[a]), norm(&w[b]));
            if na > 0.0 && nb > 0.0 {
                let dot: f64 = w[a].iter().zip(&w[b]).map(|(x, y)| x * y).sum();
                c[a][b] = dot / (na * nb);
            }
        }
    }
    c
}

/// Cyclic Jacobi eigendecomposition: (eigenvalues, eigenvectors as columns).
/// Rotations are skipped for exactly-zero off-diagonal entries.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().max(1e-300);
    for _sweep in 0..200 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Rebuild from eigenpairs whose |λ| exceeds `threshold`.
pub fn lsa_reconstruct(c: &[Vec<f64>], threshold: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = c.len();
    let (values, vectors) = jacobi_eigen(c);
    let mut out = vec![vec![0.0; n]; n];
    for (i, &lambda) in values.iter().enumerate() {
        if lambda.abs() > threshold {
            for a in 0..n {
                for b in 0..n {
                    out[a][b] += lambda * vectors[a][i] * vectors[b][i];
                }
            }
        }
    }
    let mut singular: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    singular.sort_by(|x, y| y.total_cmp(x));
    (singular, out)
}

/// Eigenvalues of a PSD matrix by power iteration with deflation, descending.
pub fn power_iteration_spectrum(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let scale = matrix.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let mut a = matrix.to_vec();
    let mut out = Vec::new();
    for round in 0..n {
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919 + round * 104729) % 97) as f64 / 97.0).collect();
        let norm0 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm0);
        let mut lambda = 0.0;
        for _ in 0..100_000 {
            let y: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * x[j]).sum()).collect();
            lambda = x.iter().zip(&y).map(|(p, q)| p * q).sum();
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm <= 1e-12 * scale {
                break;
            }
            let next: Vec<f64> = y.iter().map(|v| v / norm).collect();
            let step = next.iter().zip(&x).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            x = next;
            if step < 1e-14 {
                break;
            }
        }
        out.push(lambda.abs());
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= lambda * x[i] * x[j];
            }
        }
    }
    out.sort_by(|x, y| y.total_cmp(x));
    out
}

/// (predicted CWE, score, tied, resolution) for one row over labeled columns.
pub fn argmax_row(
    row: &[f64],
    weakness_ids: &[String],
    label: Option<&str>,
) -> (Option<String>, f64, bool, &'static str) {
    if row.iter().all(|&x| x == 0.0) {
        return (None, 0.0, false, "none");
    }
    let mut max = f64::NEG_INFINITY;
    for &x in row {
        if x > max {
            max = x;
        }
    }
    let tied: Vec<&String> = row
        .iter()
        .zip(weakness_ids)
        .filter(|(x, _)| max - **x <= 1e-12 * max.abs())
        .map(|(_, id)| id)
        .collect();
    if tied.len() == 1 {
        return (Some(tied[0].clone()), max, false, "none");
    }
    if let Some(l) = label {
        if tied.iter().any(|t| t.as_str() == l) {
            return (Some(l.to_string()), max, true, "ground_truth");
        }
    }
    let number = |id: &str| id.trim_start_matches("CWE-").parse::<u64>().unwrap();
    let lowest = tied.iter().min_by_key(|t| number(t)).unwrap();
    (Some((*lowest).clone()), max, true, "lowest_cwe_id")
}

pub fn class_indices(corpus: &Corpus, kind: DocumentKind) -> Vec<usize> {
    corpus
        .documents()
        .iter()
        .enumerate()
        .filter(|(_, d)| d.kind == kind)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMapping {
    pub vulnerability_id: String,
    pub predicted: Option<String>,
    pub score: f64,
    pub tied: bool,
    pub resolution: &'static str,
}

/// Mappings of every vulnerability from a dense similarity matrix.
pub fn oracle_mappings(corpus: &Corpus, similarity: &[Vec<f64>], labels: &BTreeMap<String, String>) -> Vec<OracleMapping> {
    let weaknesses = class_indices(corpus, DocumentKind::Weakness);
    let weakness_ids: Vec<String> = weaknesses.iter().map(|&i| corpus.documents()[i].id.clone()).collect();
    class_indices(corpus, DocumentKind::Vulnerability)
        .into_iter()
        .map(|v| {
            let id = corpus.documents()[v].id.clone();
            let row: Vec<f64> = weaknesses.iter().map(|&w| similarity[v][w]).collect();
            let (predicted, score, tied, resolution) =
                argmax_row(&row, &weakness_ids, labels.get(&id).map(String::as_str));
            OracleMapping {
                vulnerability_id: id,
                predicted,
                score,
                tied,
                resolution,
            }
        })
        .collect()
}

/// (k, m_k, avg length, avg weakness length, avg vulnerability length).
pub fn oracle_descriptive(corpus: &Corpus, k: usize, vocab: &[String], counts: &[Vec<u64>]) -> (usize, usize, f64, f64, f64) {
    let lengths: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let avg_of = |pick: &dyn Fn(DocumentKind) -> bool| {
        let chosen: Vec<u64> = corpus
            .documents()
            .iter()
            .zip(&lengths)
            .filter(|(d, _)| pick(d.kind))
            .map(|(_, &l)| l)
            .collect();
        chosen.iter().sum::<u64>() as f64 / chosen.len() as f64
    };
    (
        k,
        vocab.len(),
        avg_of(&|_| true),
        avg_of(&|kind| kind == DocumentKind::Weakness),
        avg_of(&|kind| kind == DocumentKind::Vulnerability),
    )
}

/// Recount (same, different) per repository name and "all" from mapping
/// CSV rows `(vulnerability_id, ground_truth_cwe, agree)` and an id → repository map.
pub fn recount(rows: &[(String, String, String)], repository: &BTreeMap<String, String>) -> BTreeMap<String, (u64, u64)> {
    let mut out: BTreeMap<String, (u64, u64)> = ["maven", "pip", "npm", "rubygems", "all"]
        .iter()
        .map(|r| (r.to_string(), (0, 0)))
        .collect();
    for (id, truth, agree) in rows {
        if truth.is_empty() {
            continue;
        }
        let repo = &repository[id];
        for key in [repo.as_str(), "all"] {
            let cell = out.get_mut(key).unwrap();
            if agree == "true" {
                cell.0 += 1;
            } else {
                cell.1 += 1;
            }
        }
    }
    out
}

pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

/// Relative path → bytes of every file under `root`.
pub fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

pub fn distinct<T: Ord + Clone>(items: &[T]) -> BTreeSet<T> {
    items.iter().cloned().collect()
}
