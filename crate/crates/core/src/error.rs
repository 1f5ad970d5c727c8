use thiserror::Error;

/// Errors produced by the simulator and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of a function (e.g. `t <= 0` for a density).
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters that violate a type invariant or are mutually inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Vector/matrix sizes that do not line up.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// A covariance matrix could not be factorized even after diagonal loading.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The fixed-sample detector has nothing to lock onto (all-zero intended signal).
    #[error("no signal: intended-symbol mean is identically zero")]
    NoSignal,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
