use thiserror::Error;

/// Errors raised anywhere in the bounding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (bracket [{lower}, {upper}])")]
    NoConvergence { iterations: usize, lower: f64, upper: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("wrong network: {0}")]
    WrongNetwork(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Input problems map to exit code 2, everything else to 3.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Invalid { .. } | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
