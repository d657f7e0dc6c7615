use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not positive semidefinite (eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("function is not finite at retained eigenvalue {0:e}")]
    NonFinite(f64),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("kernel inclusion violated: {0}")]
    Kernel(String),

    #[error("operator is singular: {0}")]
    Singular(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infinite value in {0}")]
    Infinite(String),

    #[error("quadrature did not converge (last {last:e}, previous {previous:e})")]
    Quadrature { last: f64, previous: f64 },

    #[error("+inf - +inf is undefined")]
    InfMinusInf,

    #[error("precondition violated by entries {0:?}")]
    Precondition(Vec<usize>),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
