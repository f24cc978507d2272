use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid exponent {0}: exponents must lie in (0, inf]")]
    InvalidExponent(f64),

    #[error("weight is not positive and finite at {0:?}")]
    NonPositiveWeight(Vec<f64>),

    #[error("lattice does not fit the sampling grid: {0}")]
    OutsideGrid(String),

    #[error("sampling grid too coarse: {0}")]
    Undersampled(String),

    #[error("not a frame: {0}")]
    NotAFrame(String),

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("symbol does not decay at the grid boundary (relative magnitude {0:e})")]
    TailTooLarge(f64),

    #[error("expansion order {0} exceeds the supported maximum")]
    OrderTooLarge(usize),

    #[error("{what}: discrepancy {value:e} exceeds tolerance {tolerance:e}")]
    ToleranceExceeded { what: String, value: f64, tolerance: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
