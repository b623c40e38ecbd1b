use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric: relative asymmetry {0:.3e} exceeds 1e-8")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (Cholesky factorization failed)")]
    NotPositiveDefinite,

    #[error("invalid partition: p1 = {p1} must satisfy 1 <= p1 <= {p} - 1")]
    InvalidPartition { p1: usize, p: usize },

    #[error("dimension {0} too large for exhaustive signature search (max 20)")]
    SignatureSearchTooLarge(usize),

    #[error("requires {requirement}, got {got}")]
    ParameterOutOfRange { requirement: String, got: String },

    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),

    #[error("series did not converge within {0} terms")]
    SeriesDivergence(usize),

    #[error("eigendecomposition failed")]
    EigenFailure,

    #[error("quadrature failed to reach tolerance {tol:.3e} (estimate {estimate:.6e}, error {error:.3e})")]
    QuadratureFailure { tol: f64, estimate: f64, error: f64 },

    #[error("empty sample table")]
    EmptySample,

    #[error("no sampler path for 2*alpha = {two_alpha} at p = {p}: requires 2*alpha > p - 1 or integer 2*alpha")]
    NoSamplerPath { two_alpha: f64, p: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
