use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the data store, the filter and the design loops.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} covariates, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("response kind mismatch: {0}")]
    ResponseKind(String),

    #[error("non-finite value {value} in {what}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("class label {label} out of range for {classes} classes")]
    ClassOutOfRange { label: usize, classes: usize },

    #[error("{path}: empty file")]
    EmptyFile { path: PathBuf },

    #[error("parse error at row {row}, column '{column}': cannot read '{cell}'")]
    Parse { row: usize, column: String, cell: String },

    #[error("unknown column '{0}'")]
    UnknownColumn(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid tree edit: {0}")]
    TreeEdit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("filter failure at t={t}: every particle assigns zero predictive probability")]
    FilterFailure { t: usize },

    #[error("runs are not comparable: {0}")]
    Incomparable(String),

    #[error("objective evaluation failed in round {round}: {source}")]
    Objective {
        round: usize,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error("unknown test function '{0}'")]
    UnknownFunction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
