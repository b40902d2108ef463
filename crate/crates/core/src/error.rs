use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("q degenerate: the sample has {zeros} zeros out of {n}")]
    QDegenerate { zeros: usize, n: usize },

    #[error("beta undefined: zeros and ones leave no information on the shape")]
    BetaUndefined,

    #[error("insufficient range: maximum observed value {max_value} < 2")]
    InsufficientRange { max_value: u64 },

    #[error("degenerate sample: all observations are equal")]
    DegenerateSample,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("too few samples: need at least {needed}, got {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bad initialization: log-posterior is {value} at the starting point ({detail})")]
    BadInitialization { value: f64, detail: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}
