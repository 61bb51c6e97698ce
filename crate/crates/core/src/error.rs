use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight overflow: {0}")]
    WeightOverflow(String),

    #[error("frequency band overflow: {0}")]
    BandOverflow(String),

    #[error("support precondition violated: {0}")]
    Support(String),

    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
