use thiserror::Error;

/// Errors raised by the library. Search exhaustion is never an error; it is
/// reported through [`crate::solver::SolverStatus`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {value} exceeds bound {bound}")]
    Range { value: u64, bound: u64 },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("numerical instability: value {value} is {distance} away from the nearest integer")]
    NumericalInstability { value: String, distance: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("inconclusive: search budget of {budget} nodes exhausted")]
    Inconclusive { budget: u64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
