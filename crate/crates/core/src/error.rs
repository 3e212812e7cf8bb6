use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("manifold mismatch: {0}")]
    ManifoldMismatch(String),

    #[error("tangent vectors are based at different points")]
    BaseMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} violates the model constraint by {violation:e}")]
    ConstraintViolation { what: &'static str, violation: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("objective component {index} evaluated to a non-finite value")]
    Evaluation { index: usize },

    #[error("vector lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line search exhausted the step ladder below {0:e}")]
    LineSearchFailure(f64),

    #[error("step-size rule violated its contract: {0}")]
    StepRule(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
