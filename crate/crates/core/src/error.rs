use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("workload must contain at least one block")]
    EmptyWorkload,

    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("expected {expected} bytes, got {actual}")]
    Size { expected: usize, actual: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("cannot stratify: class {label} has {count} sample(s), need at least 2")]
    Stratification { label: bool, count: usize },

    #[error("training set contains a single class")]
    DegenerateTraining,

    #[error("reports were scored on different evaluation subsets")]
    Comparison,

    #[error("pipeline error: {0}")]
    Pipeline(String),

    #[error("model load error: {0}")]
    ModelLoad(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
