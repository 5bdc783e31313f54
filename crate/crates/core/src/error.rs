use thiserror::Error;

/// Failures raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("root finder did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("polynomial is not divisible: remainder norm {remainder:.3e} exceeds tolerance {tolerance:.3e}")]
    NotDivisible { remainder: f64, tolerance: f64 },

    #[error("dynatomic division failed at period {period}: {reason}")]
    DynatomicCollision { period: usize, reason: String },

    #[error("ambiguous cycle grouping at period {period} (near-parabolic parameter)")]
    AmbiguousGrouping { period: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point is exceptional for the map")]
    Exceptional,
}

pub type Result<T> = std::result::Result<T, Error>;
