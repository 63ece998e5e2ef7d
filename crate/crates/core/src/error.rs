use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("integrand tails contradict the declared exponents: {0}")]
    BadTails(String),
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("degenerate fit: {0}")]
    FitDegenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
