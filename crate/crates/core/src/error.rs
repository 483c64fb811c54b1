//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("signal too short: {len} samples, window needs {window}")]
    SignalTooShort { len: usize, window: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max |a[i][j] - a[j][i]| = {defect:.3e})")]
    NotSymmetric { defect: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{path}: {detail}")]
    Ingest { path: String, detail: String },

    #[error("model has no training samples")]
    EmptyModel,

    #[error("config: {0}")]
    Config(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
