use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("class {class} has {count} samples, need more than k={k}")]
    ClassTooSmall { class: usize, count: usize, k: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("http error fetching {url}: {msg}")]
    Http { url: String, msg: String },

    #[error("openml dataset {0} not found")]
    UnknownDataset(String),

    #[error("openml dataset {0} has no default target attribute; pass an explicit target")]
    NoDefaultTarget(u64),

    #[error("cache checksum mismatch for {path}")]
    ChecksumMismatch { path: PathBuf },

    #[error("config error: {0}")]
    Config(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid_param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub(crate) fn invalid_dataset(msg: impl Into<String>) -> Self {
        Error::InvalidDataset(msg.into())
    }
}
