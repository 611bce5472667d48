use thiserror::Error;

/// Errors raised by the checkmat library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("alphabet error: entry ({row}, {col}) = {value} is not in {{{expected}}}")]
    Alphabet {
        row: usize,
        col: usize,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("jacobi SVD did not converge after {sweeps} sweeps (residual {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(
        "cannot classify component {index}: projection norms (left {left:.4}, right {right:.4}) are ambiguous"
    )]
    Classification { index: usize, left: f64, right: f64 },

    #[error("background fit is underdetermined: {0}")]
    Underdetermined(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
