use thiserror::Error;

/// Errors raised by the statistics, models and data layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("empty input: no ordinates found")]
    EmptyInput,

    /// The request needs ordinates beyond what the table covers.
    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("convergence error: {0}")]
    Convergence(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("pole: t = {t} coincides with ordinate {ordinate}")]
    Pole { t: f64, ordinate: f64 },

    #[error("degenerate interval at index {0}: consecutive ordinates are equal")]
    DegenerateInterval(usize),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("fetch error: {0}")]
    Fetch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn coverage(msg: impl Into<String>) -> Self {
        Error::Coverage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub(crate) fn require_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {x}")))
    }
}
