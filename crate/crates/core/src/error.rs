use std::path::PathBuf;

use thiserror::Error;

/// Broad failure category, used by the command-line driver to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(String),

    #[error("columns {columns:?} are not available at horizon {horizon}")]
    Unavailable { horizon: usize, columns: Vec<String> },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("design matrix is rank deficient; column `{column}` is linearly dependent")]
    RankDeficient { column: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::Unavailable { .. } | Error::InvalidArgument(_) => {
                ErrorKind::Config
            }
            Error::RankDeficient { .. } | Error::Numerical(_) => ErrorKind::Numerical,
            Error::Data(_)
            | Error::UnknownColumn(_)
            | Error::DuplicateTimestamp(_)
            | Error::LengthMismatch { .. }
            | Error::Io { .. }
            | Error::Json { .. }
            | Error::Csv(_) => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
