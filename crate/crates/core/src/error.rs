use thiserror::Error;

/// Errors raised by constructors and solvers in this crate.
///
/// Simulation results such as timeouts are values, not errors.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} of {requested} exceeds the configured cap of {cap}")]
    TooLarge {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by a configured resource cap.
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::TooLarge { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
