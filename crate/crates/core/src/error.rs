use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = QsannError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QsannError {
    /// Invalid sizes, out-of-range hyperparameters, malformed config values.
    #[error("configuration error: {0}")]
    Config(String),

    /// A qubit, parameter or sample index that does not exist.
    #[error("index error: {0}")]
    Index(String),

    #[error("empty sequence")]
    EmptySequence,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("vocabulary mismatch: checkpoint {checkpoint}, dataset {dataset}")]
    VocabularyMismatch { checkpoint: String, dataset: String },

    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl QsannError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub(crate) fn index(msg: impl Into<String>) -> Self {
        Self::Index(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for usage/config/input problems, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::NonFinite(_) => 1,
            Self::Io { .. } => 1,
            _ => 2,
        }
    }
}
