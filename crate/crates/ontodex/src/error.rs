//! Crate-wide error type.

use thiserror::Error;

/// Errors produced while loading, validating, indexing, or ranking.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input at a specific line (1-based) of a line-oriented file,
    /// or line 1 for whole-file JSON documents.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An input violated a structural invariant (dangling relation endpoint,
    /// duplicate class name, empty seed, ...).
    #[error("{0}")]
    Validation(String),

    #[error("unknown class: {0}")]
    UnknownClass(String),

    /// A context referenced an ontology element that does not exist.
    #[error("unknown ontology element: {0}")]
    UnknownElement(String),

    #[error("unknown document id: {0}")]
    UnknownDocument(String),

    #[error("duplicate document id: {0}")]
    DuplicateDocument(String),

    /// A numeric parameter fell outside its documented range.
    #[error("{0}")]
    OutOfRange(String),

    /// A computation was invoked with arguments that violate its contract;
    /// reported rather than clamped.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported index version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse_at(line: usize, err: impl std::fmt::Display) -> Self {
        Error::Parse {
            line,
            message: err.to_string(),
        }
    }
}
