use thiserror::Error;

/// Errors raised by the vector/operator layer.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Operand dimensions do not line up.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    /// A shape is structurally invalid (zero rows/cols, ragged data, ...).
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// A NaN or infinity showed up where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// The all-zero operator was passed where a nonzero one is required.
    #[error("operator is identically zero")]
    ZeroOperator,

    /// A symmetric solve hit a non-positive pivot (matrix not SPD / rank deficient).
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
}

impl CoreError {
    pub fn dim(context: impl Into<String>, expected: usize, got: usize) -> Self {
        CoreError::DimensionMismatch {
            context: context.into(),
            expected,
            got,
        }
    }
}
