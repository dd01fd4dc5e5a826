//! Error type for the library and CLI.

use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum DscError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frequency ({xi0}, {xi1}) lies outside the grid domain [-{limit}, {limit}]^d")]
    OutOfDomain { xi0: f64, xi1: f64, limit: f64 },

    #[error("symbols are incompatible: {0}")]
    Incompatible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T, E = DscError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> DscError {
    DscError::InvalidParameter(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> DscError {
    DscError::Numerical(msg.into())
}
