use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A numeric parameter is outside the domain where the operation is defined.
    #[error("parameter `{name}` out of domain: {reason}")]
    ParameterDomain { name: &'static str, reason: String },

    /// A structural requirement on an input (matrix shape, chain topology) is violated.
    #[error("structural error: {0}")]
    Structural(String),

    /// An epoch was requested where log(A·T·θ²) ≤ 0, i.e. past the last admissible epoch.
    #[error("invalid epoch: A·T·θ² = {0} must exceed 1")]
    InvalidEpoch(f64),

    /// A caller broke the policy protocol (e.g. fed a reward for an inactive arm).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The run reached the horizon; no further actions are scheduled.
    #[error("horizon {0} exhausted")]
    HorizonExhausted(u64),

    /// Environment, policy or experiment configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Writing results failed.
    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::ParameterDomain {
        name,
        reason: reason.into(),
    }
}
