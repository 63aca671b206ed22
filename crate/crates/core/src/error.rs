use thiserror::Error;

/// Errors produced by the spectral toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// A Riesz mean was requested beyond the largest stored eigenvalue.
    #[error("z = {z} exceeds the validity ceiling {ceiling} of the truncated spectrum")]
    AboveCeiling { z: f64, ceiling: f64 },

    #[error("index {index} out of range for a spectrum with {len} values")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
