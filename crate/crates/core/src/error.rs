use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}", path = path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("line {line}: missing field \"{field}\"")]
    MissingField { line: usize, field: &'static str },

    #[error("{message}")]
    InvalidInput { message: String },

    #[error("digest collision between {first:?} and {second:?}")]
    DigestCollision { first: String, second: String },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("rejection sampling gave up after {attempts} draws: {context}")]
    SamplingExhausted { attempts: usize, context: String },

    #[error("{message}")]
    Numeric { message: String },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput {
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, used by the command line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Record { .. } | Error::MissingField { .. } => "record",
            Error::InvalidInput { .. } => "invalid-input",
            Error::DigestCollision { .. } => "collision",
            Error::NonFinite { .. } | Error::Numeric { .. } => "numeric",
            Error::DimensionMismatch { .. } => "dimension",
            Error::SamplingExhausted { .. } => "sampling",
            Error::Format { .. } => "format",
        }
    }
}
