//! Crate-wide error type. The CLI maps `Config` to exit code 2 and the
//! numerical variants to exit code 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's domain of validity (bad radius, point
    /// outside a chart, parameters outside the catalog envelope, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to converge or produced an invalid state.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Malformed configuration or catalog data.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
