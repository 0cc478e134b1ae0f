use thiserror::Error;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series truncation failed: {0}")]
    TruncationFailure(String),
    #[error("series tail not converged: last term {last_term:e} exceeds {tol:e}")]
    TailNotConverged { last_term: f64, tol: f64 },
    #[error("quadrature not converged: node doubling changed the result by {change:e} (tol {tol:e})")]
    QuadratureNotConverged { change: f64, tol: f64 },
    #[error("matrix has odd dimension {0}")]
    OddDimension(usize),
    #[error("self-duality violated by {0:e}")]
    SelfDualityViolation(f64),
    #[error("singular determinant in {0}")]
    Singular(String),
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
}

impl Error {
    /// Stable name of the variant, for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::TruncationFailure(_) => "truncation_failure",
            Error::TailNotConverged { .. } => "tail_not_converged",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::OddDimension(_) => "odd_dimension",
            Error::SelfDualityViolation(_) => "self_duality_violation",
            Error::Singular(_) => "singular",
            Error::Degenerate(_) => "degenerate",
            Error::SizeGuard(_) => "size_guard",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
