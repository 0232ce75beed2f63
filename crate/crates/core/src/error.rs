use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("measurement noise covariance must be positive definite (smallest eigenvalue {0:e})")]
    SingularNoise(f64),

    #[error("Riccati iteration did not converge after {iterations} iterations (last update {update:e})")]
    Divergence { iterations: usize, update: f64 },

    #[error("ill-conditioned matrix: {0}")]
    Conditioning(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("degenerate sign probabilities (p+ = {p_plus}, p- = {p_minus})")]
    DegenerateProbability { p_plus: f64, p_minus: f64 },

    #[error("no tabulated scaling value for threshold {0}; calibrate one instead")]
    UnsupportedThreshold(u32),

    #[error("threshold tuning failed: {0}")]
    Tuning(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
