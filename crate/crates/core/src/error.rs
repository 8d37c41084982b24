use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("element {value} is outside GF(2^{m})")]
    ElementOutOfRange { value: u32, m: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(u16),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("total bandwidth {gamma} is below the minimum feasible value {minimum}")]
    InfeasibleBandwidth { gamma: String, minimum: String },
    #[error("storage {alpha} is below the minimum feasible value {minimum}")]
    InfeasibleStorage { alpha: String, minimum: String },
    #[error("coupling system is singular for failure pattern {pattern:?}")]
    SingularCoupling { pattern: Vec<usize> },
    #[error("unsupported failure pattern: {0}")]
    UnsupportedPattern(String),
    #[error("invalid helper set: {0}")]
    InvalidHelperCount(String),
    #[error("no valid assignment found after {trials} trials")]
    NotFound { trials: usize },
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}
