//! Error types shared across the crate.

use thiserror::Error;

/// Errors reported by environment construction, solvers, trainers and IO.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid construction parameters (grid too small, bad hyperparameter, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// Structurally invalid inputs to an operation (horizon mismatch, bad simplex, ...).
    #[error("validation error: {0}")]
    Validation(String),
    /// Malformed or inconsistent dataset contents.
    #[error("data error: {0}")]
    Data(String),
    /// Training aborted (non-finite values, empty buffer, ...).
    #[error("training error: {0}")]
    Training(String),
    /// Degenerate metric computation (e.g. quality normalization bounds coincide).
    #[error("metric error: {0}")]
    Metric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// Unreadable file contents (datasets, checkpoints).
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
    pub fn training(msg: impl Into<String>) -> Self {
        Error::Training(msg.into())
    }
    pub fn metric(msg: impl Into<String>) -> Self {
        Error::Metric(msg.into())
    }
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
