use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("{source_name}:{line}: value {value} outside [{lo}, {hi}]")]
    Range {
        source_name: String,
        line: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{source_name}:{line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("duplicate key '{0}'")]
    Duplicate(String),

    #[error("id '{0}' not found")]
    MissingId(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("solver did not converge after {iterations} iterations (KKT violation {violation:.3e})")]
    Convergence { iterations: usize, violation: f64 },

    #[error("optimization diverged at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("model file: {0}")]
    ModelVersion(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable tag used by the command line to report failures.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Range { .. } => "range",
            Error::Format { .. } => "format",
            Error::Duplicate(_) => "duplicate",
            Error::MissingId(_) => "missing-id",
            Error::Dimension { .. } => "dimension",
            Error::InvalidInput(_) => "invalid-input",
            Error::Numerical(_) => "numerical",
            Error::Convergence { .. } => "convergence",
            Error::Divergence { .. } => "divergence",
            Error::UndefinedCorrelation(_) => "undefined",
            Error::ModelVersion(_) => "model",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn format(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}
