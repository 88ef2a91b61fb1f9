use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A line of an input file could not be decoded. `line` is 1-based.
    #[error("{context} line {line}: {message}")]
    Malformed {
        context: String,
        line: usize,
        message: String,
    },

    #[error("unknown tag `{0}`")]
    UnknownTag(String),

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid embedding space: {0}")]
    InvalidSpace(String),

    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("method {method} requires {resource}, which is not loaded")]
    MissingResource {
        method: &'static str,
        resource: &'static str,
    },

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid training data: {0}")]
    InvalidTrainingData(String),

    #[error("score vector lacks attribute {0}")]
    MissingAttribute(&'static str),

    #[error("optimizer budget of {budget} evaluations cannot complete an initial simplex of {needed} points")]
    BudgetTooSmall { budget: usize, needed: usize },

    #[error("need at least 2 values for a confidence interval, got {0}")]
    TooFewValues(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            context: context.into(),
            line,
            message: message.into(),
        }
    }
}
