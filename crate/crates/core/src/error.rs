use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualError {
    #[error("invalid model: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dynamically unstable or defective: {0}")]
    Unstable(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invariant violated: {name} = {value:e} exceeds tolerance {tol:e}")]
    Invariant { name: &'static str, value: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

impl DualError {
    /// True when the failure is a property of the input (no stable dual exists)
    /// rather than a numerical or programming fault.
    pub fn is_instability(&self) -> bool {
        matches!(self, DualError::Unstable(_))
    }
}

pub type Result<T> = std::result::Result<T, DualError>;
