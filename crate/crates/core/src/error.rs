use thiserror::Error;

/// Errors raised by the numerical kernels and the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported vector field: {0}")]
    UnsupportedField(String),

    #[error("time step {dt} exceeds the stability bound {dt_max}")]
    CflViolation { dt: f64, dt_max: f64 },

    #[error("non-finite value in wave state at step {step}")]
    NonFinite { step: usize },

    #[error("path leaves the grid box at t = {t}")]
    PathLeftBox { t: f64 },

    #[error("eigensolver: {0}")]
    Eigen(String),

    #[error("quadrature did not reach tolerance: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
