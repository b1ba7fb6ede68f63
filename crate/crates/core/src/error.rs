use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum KafError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("codebook holds {counted} samples but {expected} errors were supplied")]
    CountMismatch { counted: usize, expected: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("numerical breakdown at step {step}: {detail}")]
    Breakdown { step: usize, detail: String },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("spectral radius {0} >= 1: no steady state")]
    NoSteadyState(f64),

    #[error("series too short: need more than {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("column `{column}` not found; available columns: {available:?}")]
    ColumnNotFound { column: String, available: Vec<String> },

    #[error("{path}: row {row}: cannot parse `{cell}` as a number")]
    BadCell { path: PathBuf, row: usize, cell: String },

    #[error("{0}: no data rows")]
    EmptySeries(PathBuf),

    #[error("config: {0}")]
    Config(String),

    #[error("run {run}, filter {filter}: {source}")]
    Run {
        run: usize,
        filter: String,
        #[source]
        source: Box<KafError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, KafError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> KafError {
    let path = path.into();
    move |source| KafError::Io { path, source }
}
