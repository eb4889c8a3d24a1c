use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// `-alpha + sum(beta) <= 0`: the posterior is improper at `x = 0`.
    #[error("improper posterior: -alpha + sum(beta) = {excess} must be > 0")]
    Propriety { excess: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A summand was not finite inside the truncation window.
    #[error("non-finite summand {value} at count k = {k}")]
    Evaluation { k: u64, value: f64 },

    #[error("integrand is not finite at t = {at}")]
    NonFiniteIntegrand { at: f64 },

    /// Adaptive quadrature hit its depth or subdivision limit.
    #[error("quadrature did not converge: estimate {estimate}, error estimate {error_estimate}")]
    Convergence { estimate: f64, error_estimate: f64 },

    #[error("support too large: enumeration would exceed {limit} entries")]
    SupportExplosion { limit: usize },

    /// A resource guard refused the request.
    #[error("guard: {0}")]
    Guard(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
