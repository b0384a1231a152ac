use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by estimators, metrics, sessions and file IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least {required} samples, got {actual}")]
    TooFewSamples { required: usize, actual: usize },

    #[error("k_neighbors = {k} must be smaller than the sample count {n}")]
    TooManyNeighbors { k: usize, n: usize },

    #[error("value {value} at row {row} of a discrete column is not an integer")]
    NonIntegerDiscrete { row: usize, value: f64 },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("invalid regularization map: {0}")]
    Regularization(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("metric undefined: {0}")]
    Undefined(String),

    #[error("buffer limit exceeded: {requested} entries requested, limit is {limit}")]
    BufferOverflow { requested: usize, limit: usize },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures caused by the filesystem rather than by the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
