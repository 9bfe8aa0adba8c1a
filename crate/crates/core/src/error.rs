use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: unsupported format version {found:?} (expected {expected:?})")]
    FormatVersion {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pair {0}:{1} has the same word on both sides")]
    SameWordPair(String, String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("checksum mismatch: expected {expected}, found {found}")]
    ChecksumMismatch { expected: String, found: String },

    #[error("training failed: {0}")]
    Training(String),

    #[error("calibration did not converge after {iterations} iterations (A={a}, B={b}, |grad|={gradient:e})")]
    Calibration {
        iterations: usize,
        a: f64,
        b: f64,
        gradient: f64,
    },
}

impl Error {
    /// Process exit status for this error: 2 for missing or invalid input,
    /// 3 for an index format mismatch, 4 for training failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            Error::Parse { .. } | Error::InvalidArgument(_) | Error::SameWordPair(..) => 2,
            Error::FormatVersion { .. } => 3,
            Error::Training(_) | Error::Calibration { .. } => 4,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
