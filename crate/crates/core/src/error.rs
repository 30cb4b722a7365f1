use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Adaptive quadrature ran out of subdivisions before meeting the tolerance.
    #[error("quadrature did not reach tolerance: estimate {estimate}, error bound {error_bound}")]
    AccuracyFailure { estimate: f64, error_bound: f64 },

    /// The asymptotic constants are well defined but the growth laws are only
    /// proven for `2m > max(N, 2N/(N-2))`.
    #[error("order m={m} is outside the guaranteed range for N={dim} (need 2m > {bound})")]
    GuaranteeOutOfRange { m: usize, dim: usize, bound: f64 },

    /// A report that needs a converged field was given one that is not.
    #[error("field is not converged: residual {grad_norm} above tolerance {tol}")]
    NotConverged { grad_norm: f64, tol: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
