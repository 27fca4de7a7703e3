//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("curvature gate: {0}")]
    Curvature(String),
    #[error("data mismatch: {0}")]
    Mismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    /// Short machine readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Invalid(_) => "invalid",
            Error::Resource(_) => "resource",
            Error::Convergence(_) => "convergence",
            Error::Curvature(_) => "curvature",
            Error::Mismatch(_) => "mismatch",
            Error::Io(_) => "io",
            Error::Serde(_) => "serde",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
