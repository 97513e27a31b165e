use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size underflow at t = {t} (stiffness or blow-up)")]
    StepSizeUnderflow { t: f64 },

    #[error("non-finite derivative at t = {t}")]
    NonFiniteRhs { t: f64 },

    #[error("maximum number of integration steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize },

    #[error("solution is empty")]
    EmptySolution,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid LuGre parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite gradient for parameter `{0}`")]
    NonFiniteGradient(String),

    #[error("non-finite loss at epoch {epoch} in term {term}")]
    NonFiniteLoss { epoch: usize, term: &'static str },

    #[error("data generation quality check failed: {0}")]
    GenerationQuality(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
