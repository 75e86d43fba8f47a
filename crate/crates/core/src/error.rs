use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CboError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CboError {
    #[error("objective produced non-finite value (particle {index})")]
    NonFiniteValue { index: usize },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<CboError>,
    },

    #[error("run {run}: {source}")]
    AtRun {
        run: usize,
        #[source]
        source: Box<CboError>,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown objective `{name}` (valid names: {valid})")]
    UnknownObjective { name: String, valid: String },

    #[error("sigma = 0: no finite threshold exponent")]
    NoFiniteThreshold,

    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialization(String),
}

impl CboError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CboError::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CboError::Config(msg.into())
    }

    /// True for errors caused by bad user input (configuration, parameters,
    /// names) rather than failures during execution.
    pub fn is_config_error(&self) -> bool {
        match self {
            CboError::Config(_)
            | CboError::InvalidParameter { .. }
            | CboError::UnknownObjective { .. }
            | CboError::DimensionMismatch { .. }
            | CboError::NoFiniteThreshold => true,
            CboError::AtRun { source, .. } | CboError::AtStep { source, .. } => {
                source.is_config_error()
            }
            _ => false,
        }
    }
}
