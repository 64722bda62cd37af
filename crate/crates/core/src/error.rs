use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error("non-positive wealth {value} in path {path} at index {index}")]
    NonPositiveWealth { path: usize, index: usize, value: f64 },

    #[error("non-positive price {value} at index {index}")]
    NonPositivePrice { index: usize, value: f64 },

    #[error("binomial enumeration supports at most {max} games, got {n}; use Monte Carlo instead")]
    TooManyGames { n: u32, max: u32 },

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("policy `{policy}` cannot run on {market}")]
    IncompatiblePolicy { policy: String, market: String },
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects `value` unless it lies strictly inside `(lo, hi)`.
pub(crate) fn check_open(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value > lo && value < hi {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} not in ({lo}, {hi})")))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} must be positive and finite")))
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} must be finite")))
    }
}
