use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("{name} = {value} is outside the valid domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("epsilon = {epsilon} is above the fixed-point threshold 1/6; no stable error pair exists")]
    AboveFixedPointThreshold { epsilon: f64 },

    #[error("steady state did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("no crossing of {what} in ({lo}, {hi})")]
    NoCrossing {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("invalid error chain: {0}")]
    InvalidChain(String),

    #[error("state enumeration self-check failed: {0}")]
    Enumeration(String),

    #[error("invalid register: {0}")]
    InvalidRegister(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}
