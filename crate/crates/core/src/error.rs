use thiserror::Error;

pub type Result<T> = std::result::Result<T, ZenoError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZenoError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("fixed step {step} exceeds ten times the resolution limit {limit}")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("adaptive integration exceeded {max_steps} steps")]
    MaxStepsExceeded { max_steps: usize },

    #[error("readout probability is only defined for the constant readout E(t) = e1")]
    UnsupportedReadout,
}

impl ZenoError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ZenoError::InvalidParameter { name, reason: reason.into() }
    }
}
