use alloc::string::{String, ToString};

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {found}")]
    Dimension {
        op: &'static str,
        expected: String,
        found: String,
    },
    #[error("matrix is singular to working precision (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
    #[error("rollout diverged at step {step}: non-finite state")]
    RolloutDivergence { step: usize },
    #[error("state is within {r_min:e} m of landmark {landmark}; range Jacobian undefined")]
    NearLandmark { landmark: usize, r_min: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{field}: {message}")]
    InvalidField { field: String, message: String },
    #[error("unknown scenario preset {0:?}")]
    UnknownPreset(String),
}

impl Error {
    pub(crate) fn dim(op: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            op,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn field(field: &str, message: impl ToString) -> Self {
        Error::InvalidField {
            field: field.into(),
            message: message.to_string(),
        }
    }
}
