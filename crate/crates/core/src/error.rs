use std::path::PathBuf;

use thiserror::Error;

use crate::linsolve::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("spline error: {0}")]
    Spline(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// Required configuration keys that are absent or malformed.
    #[error("missing or invalid configuration keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver breakdown at iteration {iteration}: {message}")]
    Breakdown { iteration: usize, message: String },

    #[error("linear solve for {field} failed at step {step}: {report}")]
    SolveFailed {
        step: u64,
        field: String,
        report: SolveReport,
    },

    #[error("numerical divergence at step {step}: {message}")]
    Divergence { step: u64, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
