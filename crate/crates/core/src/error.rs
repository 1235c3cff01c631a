use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("invalid base q = {0}: q must be a positive finite number")]
    InvalidQ(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infinite product or series does not converge for q = {q}")]
    NonConvergent { q: f64 },

    #[error("truncation cap of {max_terms} terms reached; achieved tail bound {achieved_bound:e}")]
    TruncationCapExceeded {
        max_terms: usize,
        achieved_bound: f64,
    },

    #[error("index {n} exceeds the supported cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error(
        "adaptive quadrature failed to reach tolerance {tol:e} (estimated error {estimate:e})"
    )]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error("q = {q} is below the safe threshold for this approximation")]
    UnsafeQ { q: f64 },

    #[error("regime {regime} is not supported by {operation}")]
    UnsupportedRegime {
        regime: &'static str,
        operation: &'static str,
    },

    #[error("no sign threshold found below x = {limit}")]
    ThresholdNotFound { limit: f64 },

    #[error("invalid precision policy: {0}")]
    InvalidPrecision(String),

    #[error("invalid quotient specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, QError>;
