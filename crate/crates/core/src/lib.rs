//! Map vulnerability advisories to CWE weaknesses with classical text
//! retrieval.
//!
//! Advisories and weakness descriptions are loaded into a [`corpus::Corpus`],
//! labeled by identifier search against an NVD CVE→CWE table
//! ([`groundtruth`]), reduced to stemmed k-gram counts ([`preprocess`]),
//! weighted by one of five term weighting schemes ([`weights`]) and compared
//! by cosine similarity ([`similarity`]), optionally after rank reduction
//! ([`lsa`]). Each vulnerability is mapped to its most similar weakness and
//! the result is scored against the identifier labels ([`eval`]).
//! [`pipeline::run_grid`] runs every scheme and gram order at once.
//!
//! The `examples/` directory has one runnable program per stage:
//!
//! | example | shows |
//! |---|---|
//! | `advisory` | markdown advisory reduction and markup stripping |
//! | `ground_truth` | identifier search and qualification |
//! | `kgrams` | tokenizing, stemming and k-gram vocabularies |
//! | `weighting` | the five weighting schemes |
//! | `mapping` | cosine similarity and argmax mapping with tie-breaks |
//! | `lsa` | singular value reduction of a similarity matrix |
//! | `precision` | precision tables per repository |
//! | `full_grid` | the whole grid over the bundled fixture corpus |

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod groundtruth;
pub mod lsa;
pub mod pipeline;
pub mod preprocess;
pub mod similarity;
pub mod weights;

pub use error::{Error, Result};
