use smq_conic::{ConicError, Residuals, Status};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown space '{0}'")]
    UnknownSpace(String),
    #[error("space '{0}' would appear twice")]
    SpaceCollision(String),
    #[error("operator is not an isometry (deviation {0:.3e})")]
    NonIsometry(f64),
    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NonTracePreserving(f64),
    #[error("problem exceeds the size cap: {0}")]
    SizeCap(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("solver failed with status {status} (primal {:.2e}, dual {:.2e}, gap {:.2e})", residuals.primal, residuals.dual, residuals.gap)]
    SolverFailure { status: Status, residuals: Residuals },
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

pub type Result<T> = std::result::Result<T, Error>;
