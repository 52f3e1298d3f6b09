use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by a bicomplex zero divisor")]
    ZeroDivisor,
    #[error("parameters make a denominator a zero divisor: {0}")]
    SingularParameters(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("parse error: {0}")]
    Parse(&'static str),
    #[error("no solution: Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoSolution { iterations: usize, residual: f64 },
    #[error("trajectory diverged during outward integration")]
    Diverged,
    #[error("numerical failure: {0}")]
    NumericalFailure(&'static str),
    #[error("not converged: {0}")]
    NotConverged(&'static str),
    #[error("eigenvalue tracking failed at theta = {theta}: {reason}")]
    TrackingFailure { theta: f64, reason: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;
