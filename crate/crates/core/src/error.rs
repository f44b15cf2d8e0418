use std::path::PathBuf;

use crate::trajectory::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("lasso did not converge after {sweeps} sweeps (last max coefficient change {max_change:e})")]
    NotConverged {
        sweeps: usize,
        max_change: f64,
        /// Last coordinate-descent iterate.
        coefficients: Vec<f64>,
    },

    #[error("rollout produced a non-finite state at step {step}")]
    Diverged {
        step: usize,
        /// States predicted before the first non-finite one.
        partial: Trajectory,
    },

    #[error("henon orbit escaped |x| > 1e6 at step {step}")]
    Escaped { step: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Unsupported(_) => "unsupported",
            Error::NotConverged { .. } => "not-converged",
            Error::Diverged { .. } => "diverged",
            Error::Escaped { .. } => "escaped",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}
