use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {degree} exceeds basis maximum {max}")]
    DegreeOutOfRange { degree: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("tensor needs {entries} entries but the budget is {budget}")]
    Budget { entries: u128, budget: u64 },

    #[error("quadrature rule is exact to degree {have}, degree {need} required")]
    UnderResolved { have: usize, need: usize },

    #[error("gram matrix numerically singular (residual ratio {0:e})")]
    Singular(f64),

    #[error("snr {lambda} outside admissible range [{min}, {max}]")]
    SnrOutOfRange { lambda: f64, min: f64, max: f64 },

    #[error("rejection sampler gave up after {0} proposals")]
    RejectionExhausted(u64),

    #[error("iterate collapsed to numerical zero")]
    Degenerate,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("state has {got} bits, declared size is {expected}")]
    StateLength { expected: usize, got: usize },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("enumeration of size {size} exceeds limit {limit}")]
    EnumerationBudget { size: u128, limit: u128 },

    #[error("malformed batch file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
