use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter is outside the range where the scheme is defined.
    #[error("{name} = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("index ({row}, {col}) out of range: {detail}")]
    Index {
        row: usize,
        col: usize,
        detail: String,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("could not allocate {0} matrix entries")]
    Allocation(usize),

    #[error("symmetric factorization failed for a {0}x{0} step matrix")]
    Factorization(usize),

    #[error("conjugate gradient stopped after {iterations} iterations at relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("quadrature did not reach {target:e}: successive estimates differ by {difference:e}")]
    Quadrature { target: f64, difference: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, range: &'static str) -> Self {
        Error::Domain { name, value, range }
    }
}

/// Rejects orders outside the open interval (1, 2).
pub(crate) fn check_space_order(name: &'static str, value: f64) -> Result<()> {
    if value > 1.0 && value < 2.0 {
        Ok(())
    } else {
        Err(Error::domain(name, value, "(1, 2)"))
    }
}
