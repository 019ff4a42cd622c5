//! Text to k-gram counts.
//!
//! Each segment goes through lowercasing, tokenization on non-alphanumeric
//! characters, trimming (alphabetic only, not a stop word, 3 to 20
//! characters), Porter stemming, and k-gram windowing. Windows never span two
//! segments. Grams seen two times or fewer across the whole corpus are pruned
//! from the vocabulary.

mod porter;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

pub use porter::porter_stem;

use crate::corpus::{Corpus, RawDocument};
use crate::error::{Error, Result};

const BUNDLED_STOP_WORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Minimum and maximum token length kept by [`trim`], in characters.
pub const MIN_TOKEN_LEN: usize = 3;
pub const MAX_TOKEN_LEN: usize = 20;

/// Grams whose total corpus count is at most this are pruned.
pub const PRUNE_AT_MOST: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWordList {
    words: BTreeSet<String>,
}

impl StopWordList {
    /// The English list shipped with the crate (`data/stopwords_en.txt`).
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOP_WORDS).expect("bundled stop-word list is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::MissingFile {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// One word per line; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut words = BTreeSet::new();
        for (n, line) in text.lines().enumerate() {
            let word = line.trim();
            if word.is_empty() {
                continue;
            }
            if !word.chars().all(|c| c.is_alphabetic() && !c.is_uppercase()) {
                return Err(Error::StopWords(format!(
                    "line {}: {word:?} is not a lowercase alphabetic word",
                    n + 1
                )));
            }
            words.insert(word.to_string());
        }
        if words.is_empty() {
            return Err(Error::StopWords("list is empty".into()));
        }
        Ok(StopWordList { words })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub fn normalize(text: &str) -> String {
    text.to_lowercase()
}

/// Split on every character that is neither a letter nor a digit.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn keep_token(token: &str, stops: &StopWordList) -> bool {
    let len = token.chars().count();
    (MIN_TOKEN_LEN..=MAX_TOKEN_LEN).contains(&len)
        && token.chars().all(char::is_alphabetic)
        && !stops.contains(token)
}

pub fn trim(tokens: &[String], stops: &StopWordList) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| keep_token(t, stops))
        .cloned()
        .collect()
}

/// Sliding windows of `k` stems joined by single spaces.
pub fn kgrams(stems: &[String], k: usize) -> Vec<String> {
    assert!((1..=3).contains(&k), "gram order must be 1, 2 or 3, got {k}");
    stems.windows(k).map(|w| w.join(" ")).collect()
}

/// normalize → tokenize → trim → stem for one piece of text.
pub fn stems(text: &str, stops: &StopWordList) -> Vec<String> {
    tokenize(&normalize(text))
        .into_iter()
        .filter(|t| keep_token(t, stops))
        .map(|t| porter_stem(&t))
        .collect()
}

/// Stem lists of every segment of a document, in segment order.
pub fn document_stems(document: &RawDocument, stops: &StopWordList) -> Vec<Vec<String>> {
    document
        .segments
        .iter()
        .map(|seg| stems(&seg.content, stops))
        .collect()
}

fn segment_grams(segment_stems: &[Vec<String>], k: usize) -> impl Iterator<Item = String> + '_ {
    segment_stems.iter().flat_map(move |s| kgrams(s, k))
}

/// Pruned, lexicographically indexed k-gram vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vocabulary {
    k: usize,
    grams: BTreeMap<String, usize>,
    totals: Vec<u64>,
}

impl Vocabulary {
    /// Build from total gram counts, pruning counts ≤ [`PRUNE_AT_MOST`].
    pub fn from_totals(k: usize, totals: BTreeMap<String, u64>) -> Result<Self> {
        let mut grams = BTreeMap::new();
        let mut kept = Vec::new();
        for (gram, count) in totals {
            if count > PRUNE_AT_MOST {
                grams.insert(gram, kept.len());
                kept.push(count);
            }
        }
        if grams.is_empty() {
            return Err(Error::EmptyVocabulary(k));
        }
        Ok(Vocabulary {
            k,
            grams,
            totals: kept,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Column count m_k.
    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn index(&self, gram: &str) -> Option<usize> {
        self.grams.get(gram).copied()
    }

    /// (gram, column, total corpus count) in column order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, usize, u64)> {
        self.grams
            .iter()
            .map(|(g, &j)| (g.as_str(), j, self.totals[j]))
    }
}

/// Sparse counts f_ij of one document over a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DocumentTermCounts {
    pub document: usize,
    /// (column, count) sorted by column; every count ≥ 1.
    pub counts: Vec<(usize, u64)>,
    /// L_i, the sum of `counts`.
    pub length: u64,
}

impl DocumentTermCounts {
    pub fn from_map(document: usize, map: BTreeMap<usize, u64>) -> Self {
        let counts: Vec<(usize, u64)> = map.into_iter().filter(|&(_, c)| c > 0).collect();
        let length = counts.iter().map(|&(_, c)| c).sum();
        DocumentTermCounts {
            document,
            counts,
            length,
        }
    }

    pub fn get(&self, column: usize) -> u64 {
        self.counts
            .binary_search_by_key(&column, |&(j, _)| j)
            .map_or(0, |pos| self.counts[pos].1)
    }
}

/// Count matrix of a corpus for one gram order: one row per document in corpus order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountMatrix {
    pub k: usize,
    pub doc_ids: Vec<String>,
    pub n_cols: usize,
    pub rows: Vec<DocumentTermCounts>,
}

/// Stems of every segment of every document, computed once and reused for each k.
#[derive(Debug, Clone)]
pub struct StemmedCorpus {
    doc_ids: Vec<String>,
    documents: Vec<Vec<Vec<String>>>,
}

impl StemmedCorpus {
    pub fn new(corpus: &Corpus, stops: &StopWordList) -> Self {
        let documents = corpus
            .documents()
            .par_iter()
            .map(|doc| document_stems(doc, stops))
            .collect();
        StemmedCorpus {
            doc_ids: corpus.ids(),
            documents,
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn vocabulary(&self, k: usize) -> Result<Vocabulary> {
        let per_doc: Vec<HashMap<String, u64>> = self
            .documents
            .par_iter()
            .map(|segs| {
                let mut counts = HashMap::new();
                for gram in segment_grams(segs, k) {
                    *counts.entry(gram).or_insert(0) += 1;
                }
                counts
            })
            .collect();
        let mut totals = BTreeMap::new();
        for counts in per_doc {
            for (gram, c) in counts {
                *totals.entry(gram).or_insert(0) += c;
            }
        }
        Vocabulary::from_totals(k, totals)
    }

    pub fn counts(&self, vocab: &Vocabulary) -> CountMatrix {
        let rows = self
            .documents
            .par_iter()
            .enumerate()
            .map(|(i, segs)| count_stemmed(i, segs, vocab))
            .collect();
        CountMatrix {
            k: vocab.k(),
            doc_ids: self.doc_ids.clone(),
            n_cols: vocab.len(),
            rows,
        }
    }
}

fn count_stemmed(document: usize, segment_stems: &[Vec<String>], vocab: &Vocabulary) -> DocumentTermCounts {
    let mut map = BTreeMap::new();
    for gram in segment_grams(segment_stems, vocab.k()) {
        if let Some(j) = vocab.index(&gram) {
            *map.entry(j).or_insert(0) += 1;
        }
    }
    DocumentTermCounts::from_map(document, map)
}

/// Vocabulary of gram order `k` over the whole corpus.
pub fn build_vocabulary(corpus: &Corpus, k: usize, stops: &StopWordList) -> Result<Vocabulary> {
    StemmedCorpus::new(corpus, stops).vocabulary(k)
}

/// In-vocabulary gram counts of one document. `document` is its corpus index.
pub fn count_terms(document: usize, doc: &RawDocument, vocab: &Vocabulary, stops: &StopWordList) -> DocumentTermCounts {
    count_stemmed(document, &document_stems(doc, stops), vocab)
}
