use thiserror::Error;

/// Errors raised by covariance-matrix computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("invalid state: smallest symplectic eigenvalue {0} violates the uncertainty relation")]
    InvalidState(f64),

    #[error("state is not pure: symplectic eigenvalues deviate from 1 by {0:e}")]
    NotPure(f64),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invariants are not symmetric: n_a = {0}, n_b = {1}")]
    Asymmetric(f64, f64),

    #[error("candidate is not below the target covariance matrix (min eigenvalue of gap {0:e})")]
    NotBelow(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
