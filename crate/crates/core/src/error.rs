use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input data violates a precondition of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no boundaries")]
    NoBoundaries,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("malformed {what} in {}: {msg}", path.display())]
    Malformed { what: &'static str, path: PathBuf, msg: String },

    #[error("unknown utterance `{0}`")]
    UnknownUtterance(String),

    /// An internal invariant failed. Always a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid_param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// Process exit status used by the CLI: 1 usage, 2 missing or unusable
    /// input, 3 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 1,
            Error::Invariant(_) => 3,
            _ => 2,
        }
    }
}
