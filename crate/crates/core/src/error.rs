use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Text ingestion failure; `line` is 1-based.
    #[error("line {line}: {message}")]
    Ingestion { line: usize, message: String },

    /// Binary ingestion failure; `offset` is the byte offset where decoding stopped.
    #[error("byte offset {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("duplicate patterns at rows {first} and {second}")]
    DuplicatePattern { first: usize, second: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
