//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("config: {0}")]
    Config(String),

    /// A map or geometry description failed validation.
    #[error("environment: {0}")]
    Env(String),

    /// Interests vanished everywhere and no option could be offered.
    #[error("no option has positive interest mass at the current state")]
    NoInitiableOption,

    /// A parameter update would write a non-finite value.
    #[error("diverged: non-finite {quantity} during {stage}")]
    Diverged { stage: &'static str, quantity: &'static str },

    /// Finite differencing hit a non-finite function evaluation.
    #[error("finite difference probe produced a non-finite value at component {component}")]
    NonFiniteProbe { component: usize },

    /// The transfer switch needs at least two active goals.
    #[error("transfer: {0}")]
    Transfer(String),

    /// A checkpoint or config file could not be parsed.
    #[error("parse {path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    /// 1 is bad input, 2 is a runtime failure such as divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Env(_) | Error::Parse { .. } | Error::Io(_) => 1,
            Error::Diverged { .. }
            | Error::NonFiniteProbe { .. }
            | Error::NoInitiableOption
            | Error::Transfer(_) => 2,
        }
    }
}
