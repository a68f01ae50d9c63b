use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter falls outside the range the dynamics are defined for.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A parameter violates one of the hypotheses the convergence results rely on.
    #[error("{param} = {value} violates the hypothesis {hypothesis}")]
    Hypothesis {
        param: &'static str,
        value: f64,
        hypothesis: &'static str,
    },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite state {value} at step {step}")]
    NonFinite { step: usize, value: f64 },

    #[error("infinite remaining variance: integral of {integrand} diverges on [{start}, inf)")]
    InfiniteVariance { integrand: String, start: f64 },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
