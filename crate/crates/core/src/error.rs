use thiserror::Error;

/// Errors raised by mesh construction, weight assembly and the time march.
#[derive(Debug, Error)]
pub enum FracError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kernel domain error at (k={k}, j={j}): star point {star} does not exceed {bound}")]
    KernelDomain { k: usize, j: usize, star: f64, bound: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("step index mismatch: weights are for step {weights}, system requested step {step}")]
    StepMismatch { weights: usize, step: usize },

    #[error("step-size condition violated: lambda1 * tau^alpha = {lhs:.6e} > {rhs:.6e}")]
    StepSizeCondition { lhs: f64, rhs: f64 },

    #[error("linear solve failed at step {step}: {reason}")]
    LinearSolve { step: usize, reason: String },

    #[error("problem has no exact solution")]
    MissingExactSolution,

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FracError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> FracError {
    FracError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
