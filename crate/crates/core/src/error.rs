use thiserror::Error;

/// Errors raised by the library. The CLI maps every variant to exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mean {mean} is outside the valid range of the {family} family")]
    InvalidMean { family: &'static str, mean: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("arm index {index} out of range for {arms} arms")]
    IndexOutOfRange { index: usize, arms: usize },

    #[error("arm {0} has not been pulled yet")]
    UnpulledArm(usize),

    #[error("best arm is not unique")]
    NonUniqueBestArm,

    #[error("ordering violation: expected {0}")]
    OrderingViolation(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("policy `{0}` is not implemented; out of scope")]
    NotImplemented(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
