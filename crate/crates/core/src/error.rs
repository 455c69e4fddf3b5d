use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("latent correlation matrix is not positive semidefinite: leading minor of order {minor} fails")]
    NotPositiveSemidefinite { minor: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("quadrature did not converge (estimate {estimate:e}, error estimate {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("series tail bound {bound:e} not certified below {target:e} after {terms} terms")]
    TailBound { bound: f64, target: f64, terms: usize },

    #[error("block-sum enumeration unsupported: {0}")]
    EnumerationUnsupported(String),

    #[error("block-sum enumeration budget exceeded: block length {len} > {cap}")]
    EnumerationBudget { len: usize, cap: usize },

    #[error("total variance is zero")]
    ZeroVariance,

    #[error("grid too short: {len} points, at least {min} required")]
    GridTooShort { len: usize, min: usize },

    #[error("complex factor {index} has modulus {modulus} > 1")]
    ModulusViolation { index: usize, modulus: f64 },

    #[error("no samples")]
    Empty,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
