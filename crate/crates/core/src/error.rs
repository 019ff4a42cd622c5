use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the pipeline.
///
/// Variants split into input problems (bad files, bad configuration,
/// inconsistent data) and internal failures; [`Error::is_input_error`]
/// drives the CLI's exit status.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    MissingFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("weakness {0:?} is not in the allowed CWE set")]
    WeaknessNotAllowed(String),

    #[error("document {0:?} has no text segments")]
    EmptyDocument(String),

    #[error("{path}:{line}: {message}")]
    MappingParse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{cve} is mapped to both {first} and {second}")]
    ConflictingMapping {
        cve: String,
        first: String,
        second: String,
    },

    #[error("NVD mapping contains no CWE identifiers")]
    EmptyMapping,

    #[error("invalid stop-word list: {0}")]
    StopWords(String),

    #[error("vocabulary for k={0} is empty after pruning")]
    EmptyVocabulary(usize),

    #[error("corpus has no documents")]
    EmptyCorpus,

    #[error("corpus needs at least one weakness and one vulnerability (got {weaknesses} and {vulnerabilities})")]
    MissingDocumentClass {
        weaknesses: usize,
        vulnerabilities: usize,
    },

    #[error("similarity matrix labels do not follow corpus order")]
    LabelMismatch,

    #[error("matrix must be square and symmetric: {0}")]
    NotSymmetric(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing run artifacts: {0}")]
    MissingArtifacts(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by user input rather than a bug or the environment.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv(_) | Error::NotSymmetric(_))
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
