use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coefficient {field} must equal 1 (got {value})")]
    Normalization { field: String, value: f64 },

    #[error("zero coefficient {field}")]
    ZeroCoefficient { field: String },

    #[error("{field} dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch {
        field: String,
        expected: String,
        found: String,
    },

    #[error("non-finite entry in {field}")]
    NonFinite { field: String },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("matrix is not invertible at these parameters (pivot ratio {pivot_ratio:e})")]
    Singular { pivot_ratio: f64 },

    #[error("derivative order {0} out of range 0..=4")]
    OrderOutOfRange(i64),

    #[error("fractional order {0} unsupported (must exceed -2)")]
    UnsupportedOrder(f64),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("kernel argument {0} outside supported range |x| <= 50")]
    KernelRange(f64),

    #[error("quadrature failed to converge (error estimate {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("no invertible point found within budget")]
    NoInvertiblePoint,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
