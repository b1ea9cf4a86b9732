use thiserror::Error;

/// Error type shared across the lab.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or scenario failed validation before any work ran.
    #[error("invalid configuration: {0}")]
    Validation(String),
    /// A contract was violated at runtime (negative dt, unknown flow, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A numeric quantity became non-finite where finiteness is required.
    #[error("non-finite value in {0}")]
    NonFinite(String),
    /// Malformed checkpoint / ensemble / config file.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
