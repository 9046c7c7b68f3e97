use std::path::PathBuf;

use thiserror::Error;

/// Failure categories shared across the toolkit.
///
/// Each variant maps onto one of the process exit-code families used by the
/// command-line driver (see [`Error::category`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("invalid hyperparameter `{name}`: {reason}")]
    InvalidHyperparameter { name: String, reason: String },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("training diverged: non-finite gradient in layer {layer}")]
    Divergence { layer: usize },

    #[error("training diverged: {0}")]
    NonFiniteLoss(String),

    #[error("guidance blow-up at denoising step {step}: |score| = {magnitude:e}")]
    GuidanceBlowup { step: usize, magnitude: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset is empty: {0}")]
    EmptyDataset(String),

    #[error("all events were eliminated by {k}-core filtering")]
    EmptyAfterFilter { k: usize },

    #[error("degenerate catalog: {0}")]
    DegenerateCatalog(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { key: String, line: usize, message: String },

    #[error("`{key}` = {value} is outside the allowed range {allowed}")]
    OutOfRange { key: String, value: String, allowed: String },

    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },

    #[error("checkpoint version mismatch: file has version {found}, this build reads version {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse grouping used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Divergence,
    Incompatible,
    Other,
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    pub fn hyper(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidHyperparameter { name: name.to_string(), reason: reason.into() }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidHyperparameter { .. } | Error::Config { .. } | Error::OutOfRange { .. } => {
                ErrorCategory::Config
            }
            Error::Parse { .. }
            | Error::EmptyDataset(_)
            | Error::EmptyAfterFilter { .. }
            | Error::DegenerateCatalog(_) => ErrorCategory::Data,
            Error::Divergence { .. } | Error::NonFiniteLoss(_) | Error::GuidanceBlowup { .. } => {
                ErrorCategory::Divergence
            }
            Error::Incompatible(_) | Error::VersionMismatch { .. } | Error::Checkpoint { .. } => {
                ErrorCategory::Incompatible
            }
            Error::InvalidInput(_)
            | Error::InvalidDistribution(_)
            | Error::UndefinedMetric(_)
            | Error::Io { .. } => ErrorCategory::Other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
