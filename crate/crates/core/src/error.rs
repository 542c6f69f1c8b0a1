use thiserror::Error;

/// Errors raised by the numerical routines and file readers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter record violated its invariants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A moment or intermediate quantity overflowed `f64`.
    #[error("overflow: {0}")]
    Overflow(String),

    /// No sign change of the shape equation was found in the search interval.
    #[error("fit failed: no sign change in [{lo}, {hi}] (residuals {residual_lo:e}, {residual_hi:e})")]
    NoBracket {
        lo: f64,
        hi: f64,
        residual_lo: f64,
        residual_hi: f64,
    },

    /// The root solver hit its iteration cap.
    #[error("root solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Not enough data for the requested estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

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

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
