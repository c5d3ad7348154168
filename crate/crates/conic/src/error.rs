use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid cone specification: {0}")]
    InvalidCone(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("parse error at line {line}, offset {offset}: {message}")]
    Parse {
        line: usize,
        offset: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, ConicError>;
