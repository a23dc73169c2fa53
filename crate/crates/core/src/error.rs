use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VexError {
    #[error("exponent bounds violate 1 < p_- <= p_+ < inf: {0}")]
    BoundViolation(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("non-finite sample at {location}: {value}")]
    NonFiniteSample { location: String, value: f64 },

    #[error("lambda must be positive, got {0}")]
    BadLambda(f64),

    #[error("bracket expansion failed: {0}")]
    BracketFailure(String),

    #[error("bad scale: {0}")]
    BadScale(String),

    #[error("argument {x} outside domain ({lower}, inf) of {what}")]
    DomainError { what: String, x: f64, lower: f64 },

    #[error("bad config: {0}")]
    BadConfig(String),

    #[error("denominator condition violated: {0}")]
    DenominatorViolation(String),

    #[error("bad grid: {0}")]
    BadGrid(String),

    #[error("spec error: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, VexError>;
