use thiserror::Error;

/// Errors raised by the library.
///
/// `Verification` is reserved for an internal invariant caught broken; every
/// other variant is a precondition or input problem.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("malformed object: {0}")]
    Malformed(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("cannot evaluate below horizon at index {index}: {msg}")]
    Evaluation { index: u64, msg: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }

    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Verification(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
