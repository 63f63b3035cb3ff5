use thiserror::Error;

/// Errors surfaced by the tracking toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or dimension mismatch caught before any numerics run.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical operation produced a non-finite or singular result.
    #[error("numerical error{}: {message}", step.map(|k| format!(" at step {k}")).unwrap_or_default())]
    Numerical {
        step: Option<usize>,
        message: String,
    },

    /// An operation was called in a state that cannot satisfy it (empty window, too few samples).
    #[error("state error: {0}")]
    State(String),

    /// A text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A file had the wrong schema or violated a format-level assumption.
    #[error("format error: {0}")]
    Format(String),

    /// Model training finished but missed its accuracy bar.
    #[error("training error: achieved RMSE {achieved} exceeds required {required}")]
    Training { achieved: f64, required: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(step: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Numerical {
            step,
            message: msg.into(),
        }
    }

    pub fn state(msg: impl Into<String>) -> Self {
        Error::State(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
