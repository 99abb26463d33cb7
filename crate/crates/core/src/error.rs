//! Crate-wide error type.

use std::fmt;

use crate::trainer::TrainHistory;

/// Errors produced by model construction, estimators, and training.
#[derive(Debug)]
pub enum Error {
    /// An argument violated an operation's contract.
    InvalidInput(String),
    /// An exhaustive computation was asked to exceed its enumeration limits.
    CapacityExceeded(String),
    /// Training produced non-finite parameters; the history up to the failing
    /// epoch is preserved.
    TrainingDiverged {
        epoch: usize,
        history: Box<TrainHistory>,
    },
    /// No kink-free batch could be drawn for gradient checking.
    GradCheckFailed(String),
    /// A serialized artifact could not be parsed.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::CapacityExceeded(msg) => write!(f, "capacity exceeded: {msg}"),
            Error::TrainingDiverged { epoch, .. } => {
                write!(f, "training diverged at epoch {epoch}: non-finite parameters")
            }
            Error::GradCheckFailed(msg) => write!(f, "gradient check failed: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::CapacityExceeded(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
