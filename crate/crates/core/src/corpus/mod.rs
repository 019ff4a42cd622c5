//! Weakness and vulnerability documents loaded from a JSON manifest.
//!
//! ```json
//! {"documents": [
//!   {"id": "CWE-476", "kind": "weakness",
//!    "segments": [{"origin": "weakness_entry", "path": "cwe/476.txt"}]},
//!   {"id": "pip:pymongo:40183", "kind": "vulnerability", "repository": "pip",
//!    "segments": [{"origin": "first_order", "path": "snyk/40183.md"},
//!                 {"origin": "second_order", "path": "cache/5d1f....html",
//!                  "label": "https://nvd.nist.gov/..."}]}
//! ]}
//! ```
//!
//! Segment paths are relative to the manifest's directory. First-order
//! segments are Snyk markdown advisories: only their body prose is kept as
//! text and their reference URLs are recorded on the document. Every segment
//! is markup-stripped on load; second-order pages are read from a local cache
//! whose file names come from [`cache_file_name`].

mod advisory;
mod markup;

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use advisory::{extract_first_order, extract_links, reduce_links};
pub use markup::strip_markup;

use crate::error::{Error, Result};
use crate::groundtruth::{is_cwe_id, AllowedCweSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Weakness,
    Vulnerability,
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocumentKind::Weakness => "weakness",
            DocumentKind::Vulnerability => "vulnerability",
        })
    }
}

/// Package repository a vulnerability was reported for. Weaknesses use `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Repository {
    Maven,
    Pip,
    Npm,
    #[serde(alias = "ruby_gems")]
    RubyGems,
    #[default]
    None,
}

impl Repository {
    pub const PACKAGE_REPOSITORIES: [Repository; 4] =
        [Repository::Maven, Repository::Pip, Repository::Npm, Repository::RubyGems];

    pub fn as_str(self) -> &'static str {
        match self {
            Repository::Maven => "maven",
            Repository::Pip => "pip",
            Repository::Npm => "npm",
            Repository::RubyGems => "rubygems",
            Repository::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "maven" => Some(Repository::Maven),
            "pip" => Some(Repository::Pip),
            "npm" => Some(Repository::Npm),
            "rubygems" | "ruby_gems" => Some(Repository::RubyGems),
            "none" | "" => Some(Repository::None),
            _ => None,
        }
    }
}

impl fmt::Display for Repository {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentOrigin {
    FirstOrder,
    SecondOrder,
    WeaknessEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextSegment {
    pub origin: SegmentOrigin,
    pub content: String,
    pub source_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub kind: DocumentKind,
    pub repository: Repository,
    pub segments: Vec<TextSegment>,
    /// Reference URLs taken from first-order advisories. Not part of the
    /// text used for retrieval, but searched for identifiers.
    #[serde(default)]
    pub references: Vec<String>,
}

impl RawDocument {
    /// All text that identifier search looks at: segment contents followed by
    /// reference URLs, newline separated.
    pub fn searchable_text(&self) -> String {
        self.segments
            .iter()
            .map(|s| s.content.as_str())
            .chain(self.references.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corpus {
    documents: Vec<RawDocument>,
    n_weaknesses: usize,
    n_vulnerabilities: usize,
}

impl Corpus {
    /// Build a corpus from documents already in memory, checking id uniqueness
    /// and segment presence.
    pub fn new(documents: Vec<RawDocument>) -> Result<Self> {
        let mut seen = HashSet::new();
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
            if doc.segments.is_empty() {
                return Err(Error::EmptyDocument(doc.id.clone()));
            }
        }
        let n_weaknesses = documents
            .iter()
            .filter(|d| d.kind == DocumentKind::Weakness)
            .count();
        let n_vulnerabilities = documents.len() - n_weaknesses;
        Ok(Corpus {
            documents,
            n_weaknesses,
            n_vulnerabilities,
        })
    }

    pub fn documents(&self) -> &[RawDocument] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Number of weakness documents (n1).
    pub fn n_weaknesses(&self) -> usize {
        self.n_weaknesses
    }

    /// Number of vulnerability documents (n2).
    pub fn n_vulnerabilities(&self) -> usize {
        self.n_vulnerabilities
    }

    pub fn weaknesses(&self) -> impl Iterator<Item = (usize, &RawDocument)> {
        self.documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.kind == DocumentKind::Weakness)
    }

    pub fn vulnerabilities(&self) -> impl Iterator<Item = (usize, &RawDocument)> {
        self.documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.kind == DocumentKind::Vulnerability)
    }

    pub fn ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.id.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&RawDocument> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Fail if any weakness id is not a CWE identifier in `allowed`.
    pub fn check_weaknesses(&self, allowed: &AllowedCweSet) -> Result<()> {
        for (_, doc) in self.weaknesses() {
            if !is_cwe_id(&doc.id) || !allowed.contains(&doc.id) {
                return Err(Error::WeaknessNotAllowed(doc.id.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub documents: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub kind: DocumentKind,
    #[serde(default)]
    pub repository: Repository,
    pub segments: Vec<ManifestSegment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSegment {
    pub origin: SegmentOrigin,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::MissingFile {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let mut seen = HashSet::new();
        for entry in &self.documents {
            if !seen.insert(entry.id.as_str()) {
                return Err(Error::DuplicateId(entry.id.clone()));
            }
            if entry.segments.is_empty() {
                return Err(Error::EmptyDocument(entry.id.clone()));
            }
            let repository_ok = match entry.kind {
                DocumentKind::Weakness => entry.repository == Repository::None,
                DocumentKind::Vulnerability => entry.repository != Repository::None,
            };
            if !repository_ok {
                return Err(Error::Manifest {
                    path: path.to_path_buf(),
                    message: format!(
                        "{} {:?} cannot have repository {:?}",
                        entry.kind, entry.id, entry.repository.as_str()
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Load the manifest at `manifest_path` and every file it references.
///
/// Document order is manifest order. Fails on unreadable files, duplicate
/// ids, and weakness ids outside `allowed`.
pub fn load_corpus(manifest_path: &Path, allowed: &AllowedCweSet) -> Result<Corpus> {
    let manifest = Manifest::read(manifest_path)?;
    manifest.validate(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let loaded: Vec<Result<RawDocument>> = manifest
        .documents
        .par_iter()
        .map(|entry| load_document(base, entry))
        .collect();
    let documents = loaded.into_iter().collect::<Result<Vec<_>>>()?;

    let corpus = Corpus::new(documents)?;
    corpus.check_weaknesses(allowed)?;
    Ok(corpus)
}

fn load_document(base: &Path, entry: &ManifestEntry) -> Result<RawDocument> {
    let mut segments = Vec::with_capacity(entry.segments.len());
    let mut references = Vec::new();
    for seg in &entry.segments {
        let path = base.join(&seg.path);
        let raw = std::fs::read_to_string(&path).map_err(|source| Error::MissingFile {
            path: path.clone(),
            source,
        })?;
        let content = match seg.origin {
            SegmentOrigin::FirstOrder => {
                references.extend(extract_links(&raw));
                strip_markup(&extract_first_order(&raw))
            }
            _ => strip_markup(&raw),
        };
        segments.push(TextSegment {
            origin: seg.origin,
            content,
            source_label: seg
                .label
                .clone()
                .unwrap_or_else(|| seg.path.to_string_lossy().into_owned()),
        });
    }
    Ok(RawDocument {
        id: entry.id.clone(),
        kind: entry.kind,
        repository: entry.repository,
        segments,
        references,
    })
}

/// File name under which a downloaded second-order page is cached: the hex
/// SHA-256 of the URL with an `.html` extension.
pub fn cache_file_name(url: &str) -> String {
    format!("{}.html", hex::encode(Sha256::digest(url.as_bytes())))
}

/// Whether a path names an HTML file (`.html`/`.htm`, any case).
pub fn is_html_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("html") || e.eq_ignore_ascii_case("htm"))
}
