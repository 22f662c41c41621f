use std::path::PathBuf;

/// Errors produced by the map library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("training diverged at epoch {epoch}: {message}")]
    NonFinite { epoch: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Broad classification used by front ends to pick an exit status.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Data(_) | Error::Parse { .. } | Error::DimensionMismatch { .. } => ErrorKind::Data,
            Error::Structural(_) | Error::NonFinite { .. } | Error::Io { .. } | Error::Json(_) => ErrorKind::Runtime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Runtime,
}

pub type Result<T> = std::result::Result<T, Error>;
