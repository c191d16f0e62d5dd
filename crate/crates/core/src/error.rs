//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the attribution engines, auditors, and data pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate fell outside its feature's closed interval.
    #[error("feature `{name}` (index {index}) value {value} outside bounds [{lower}, {upper}]")]
    OutOfBounds {
        name: String,
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    /// A vector had the wrong length for the feature space it targets.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Two objects bound to geometrically different feature spaces were combined.
    #[error("incompatible feature spaces: {0}")]
    SpaceMismatch(String),

    /// An argument violated a stated precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A configuration value is unusable for the requested run.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Exact coalition enumeration refused to run.
    #[error(
        "{dim} features exceed the exact enumeration capacity of {max}; reduce the feature count"
    )]
    Capacity { dim: usize, max: usize },

    /// Lookup of a worked example by id failed.
    #[error("unknown example `{id}`; available: {available}")]
    UnknownExample { id: String, available: String },

    /// Lookup of a registered model by id failed.
    #[error("unknown model `{0}`")]
    UnknownModel(String),

    /// A closed-form attribution oracle does not cover the requested inputs.
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    /// A metric has no defined value for the given inputs.
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    /// Training failed.
    #[error("training failed: {0}")]
    Training(String),

    /// Data ingestion failed.
    #[error("ingestion failed: {0}")]
    Ingest(String),

    /// A single CSV row could not be parsed.
    #[error("row at line {line}: {message}")]
    BadRow { line: u64, message: String },

    /// I/O failure, annotated with the path involved.
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
