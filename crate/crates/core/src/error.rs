use thiserror::Error;

/// Errors produced by the seriation toolkit.
#[derive(Debug, Error)]
pub enum SeriationError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("disconnected graph: {0}")]
    Disconnected(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SeriationError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        SeriationError::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        SeriationError::Parse { line, message: msg.into() }
    }

    /// Short machine-readable kind, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            SeriationError::InvalidArgument(_) => "argument",
            SeriationError::Disconnected(_) => "disconnected",
            SeriationError::NoConvergence { .. } => "solver",
            SeriationError::Parse { .. } => "parse",
            SeriationError::Config(_) => "config",
            SeriationError::Io(_) => "io",
            SeriationError::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, SeriationError>;
