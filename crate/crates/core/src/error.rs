use thiserror::Error;

/// Errors raised by the geometry, operator and verification layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point is outside the domain of {model}: {reason}")]
    Domain { model: String, reason: String },

    #[error("tangent vectors are based at different points")]
    MismatchedBase,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("field {field} cannot be evaluated on {model}")]
    ModelMismatch { field: String, model: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field is not Killing at this point (defect {defect:e} > {tolerance:e})")]
    NotKilling { defect: f64, tolerance: f64 },

    #[error("field vanishes at the evaluation point; diagnostic undefined")]
    VanishingField,

    #[error("empty sample set")]
    EmptySamples,

    #[error("finite-difference step {0:e} is outside [1e-9, 1e-2]")]
    StepOutOfRange(f64),

    #[error("rejected: {0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;
