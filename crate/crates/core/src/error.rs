use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("{op}: shape mismatch between {lhs} and {rhs}")]
    ShapeMismatch { op: &'static str, lhs: String, rhs: String },

    #[error("{op}: expected a scalar, got {shape}")]
    NotScalar { op: &'static str, shape: String },

    #[error("log: non-positive input {value} at index {index}")]
    NonPositiveLog { value: f64, index: usize },

    #[error("adam_step: non-finite gradient in parameter '{param}'")]
    NonFiniteGrad { param: String },

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("{context}: {msg}")]
    Invalid { context: String, msg: String },

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("sentence '{id}': {msg}")]
    Sentence { id: String, msg: String },

    #[error("schema: {0}")]
    Schema(String),

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Error {
    pub fn invalid(context: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Invalid { context: context.into(), msg: msg.into() }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad user input (bad config keys, missing or
    /// malformed input files) rather than runtime failures. The CLI maps
    /// these to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Parse { .. }
                | Error::Schema(_)
                | Error::Sentence { .. }
                | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
