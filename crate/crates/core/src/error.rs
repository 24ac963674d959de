use thiserror::Error;

/// Errors raised by the solvers and the sweep front-end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: argument outside the supported domain ({detail})")]
    Domain { op: &'static str, detail: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("capital became non-positive ({value}) at t = {time} (step {step})")]
    NonPositiveState { step: usize, time: f64, value: f64 },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
