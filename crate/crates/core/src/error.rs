use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: malformed record: {reason}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("empty label for document {0:?}")]
    EmptyLabel(String),

    #[error("no terms survive min_count {0}")]
    EmptyVocabulary(usize),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    EmptyInput,

    #[error("example {0} annotated twice")]
    DoubleAnnotation(usize),

    #[error("stabilizing predictions cannot use the batch stop set: the batch is a completely new set of examples at every iteration, so successive models are never compared on the same examples")]
    BatchStopSetWithSp,

    #[error("config error at key {key:?}: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for errors that stem from configuration rather than runtime failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::BatchStopSetWithSp | Error::InvalidParameter(_)
        )
    }
}
