use thiserror::Error;

/// Errors produced by the audit library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract arguments (dimension mismatch, non-finite values, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A map or codec configuration that violates its own invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// Descriptor or config text that could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Parsed document whose contents fail validation.
    #[error("validation error at `{location}`: {message}")]
    Validation { location: String, message: String },

    /// A prime code that does not match its codec configuration.
    #[error("format error: {0}")]
    Format(String),

    /// The audited map returned a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A one-dimensional root search stalled before reaching its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn validation(location: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            location: location.into(),
            message: msg.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
