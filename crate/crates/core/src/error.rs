use thiserror::Error;

/// Errors raised by the library. Precondition failures and numerical
/// non-convergence are kept apart so callers can map them to distinct exit
/// codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: i64, modulus: u64 },

    #[error("missing Hecke eigenvalue for prime {0}")]
    MissingPrime(u64),

    #[error("invalid eigenvalue data: {0}")]
    InvalidEigenData(String),

    #[error("incomplete spectral data: {0}")]
    IncompleteData(String),

    #[error("modulus {0} exceeds the supported range")]
    Overflow(u64),

    #[error("divergent synthetic spectrum at p = {p}: lambda = {lambda}")]
    DivergentSpectrum { p: u64, lambda: f64 },

    #[error("not converged: tail bound {tail_bound:e} exceeds tolerance {tol:e} after {terms} terms")]
    NotConverged { tail_bound: f64, tol: f64, terms: u64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
