use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent arguments (empty lists, mismatched grids).
    #[error("argument error: {0}")]
    Argument(String),

    /// A quadrature or iterative procedure failed to reach its tolerance.
    #[error("numeric error: {message} (estimate {estimate:e}, error {error:e}, evaluations {evaluations})")]
    Numeric {
        message: String,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    /// The discretization is too coarse for the requested quantity.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Periodic truncation no longer represents the whole-space problem.
    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    /// A kind of slowly varying function that lacks the requested capability.
    #[error("unsupported kind: {0}")]
    UnsupportedKind(String),

    /// Input data that is not finite or otherwise unusable.
    #[error("data error: {0}")]
    Data(String),

    /// The state of a trajectory contains non-finite values.
    #[error("diverged state at t = {time}")]
    Diverged { time: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by numerics or resolution rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric { .. }
                | Error::Resolution(_)
                | Error::DomainTooSmall(_)
                | Error::Diverged { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
