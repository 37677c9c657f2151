//! Error type shared by every module.

/// Errors produced by configuration validation and by numerical guards.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its admissible range. The message names the
    /// offending quantity.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A computation produced a non-finite value or two inputs that must
    /// share a discretisation do not.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
