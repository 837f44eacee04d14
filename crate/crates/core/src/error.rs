use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid level: {0}")]
    InvalidLevel(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("step called on a finished episode")]
    EpisodeDone,

    #[error("invalid generator config: {0}")]
    Generator(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty batch: {0}")]
    EmptyBatch(String),

    #[error("need at least {needed} episodes, got {got}")]
    NotEnoughEpisodes { needed: usize, got: usize },

    #[error("batch was collected for scoring only and carries no gradient data")]
    ScoringOnlyBatch,

    #[error("invalid sample set: {0}")]
    InvalidSampleSet(String),

    #[error("transport problem {rows}x{cols} exceeds the exact-solver cap of {cap} cells; subsample the inputs")]
    SizeCap { rows: usize, cols: usize, cap: usize },

    #[error("sinkhorn did not converge after {iterations} iterations (marginal residual {residual:e})")]
    SinkhornDiverged { iterations: usize, residual: f64 },

    #[error("transport simplex exceeded its pivot limit ({0})")]
    SimplexStalled(usize),

    #[error("no levels left to compare against")]
    EmptyComparisonSet,

    #[error("level is already in the buffer")]
    DuplicateLevel,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
