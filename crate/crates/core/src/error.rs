use thiserror::Error;

/// Errors raised by the model, equilibrium and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A parameter violates one of the model's domain bounds.
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    /// Vectors or matrices whose lengths must agree do not.
    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// The operation is not defined for the given inputs (wrong horizon, period out of range, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The observed block of a Gaussian covariance cannot be inverted.
    #[error("observed covariance block is singular")]
    SingularCovariance,

    /// The deviator's expected payoff is not strictly concave in its own coefficients.
    #[error("deviator payoff is not strictly concave in its coefficients")]
    NonConcave,
}

impl ModelError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ModelError::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
