use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: problem expects {expected} bits, genotype has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("insufficient budget: comparison needs {needed} evaluations, {remaining} remain")]
    InsufficientBudget { needed: u64, remaining: u64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("malformed config: {0}")]
    ConfigSyntax(String),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data in {}: {message}", path.display())]
    Data { path: PathBuf, message: String },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
