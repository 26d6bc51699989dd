use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClaycopError {
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("value {0} is outside the unit interval")]
    OutOfUnitInterval(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sample needs at least 2 points, got {0}")]
    SampleTooSmall(usize),
    #[error("invalid bracket [{lower}, {upper}]")]
    InvalidBracket { lower: f64, upper: f64 },
    #[error("replica rejected: {0}")]
    ReplicaRejected(&'static str),
    #[error("replica draw exhausted after {attempts} consecutive rejections (sum-w1 {sum_rejections}, root {root_rejections})")]
    ReplicaExhausted {
        attempts: usize,
        sum_rejections: usize,
        root_rejections: usize,
    },
    #[error("non-finite update at step {step}: {value}")]
    NonFinite { step: usize, value: f64 },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ClaycopError>;

impl From<std::io::Error> for ClaycopError {
    fn from(err: std::io::Error) -> Self {
        ClaycopError::Io(err.to_string())
    }
}

impl From<csv::Error> for ClaycopError {
    fn from(err: csv::Error) -> Self {
        ClaycopError::Csv(err.to_string())
    }
}
