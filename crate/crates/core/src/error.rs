use thiserror::Error;

/// Errors raised by the exact, numeric and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("n = {n} exceeds the exact-arithmetic ceiling {ceiling}")]
    ResourceCeiling { n: usize, ceiling: usize },

    #[error("gamma function pole at {0}")]
    Pole(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("tolerance {requested:e} unattainable: {reason}")]
    Unattainable { requested: f64, reason: String },

    #[error("{what} did not converge after {evaluations} evaluations (error estimate {error:e})")]
    NonConvergence {
        what: &'static str,
        evaluations: usize,
        error: f64,
    },

    #[error("moment table holds {available} entries, {needed} required")]
    InsufficientMoments { available: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
