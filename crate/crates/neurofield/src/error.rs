use std::path::PathBuf;

/// Errors produced by model construction, simulation, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value violates the schema. `path` is the offending
    /// key in `section.key` form.
    #[error("config error at {path}: {reason}")]
    Config { path: String, reason: String },

    /// A non-finite value appeared in the field; the path is aborted.
    #[error("path diverged at step {step} (t = {t})")]
    Divergence { step: usize, t: f64 },

    /// A stationarity search ran out of its step budget.
    #[error("no convergence after {steps} steps (last residual {residual:e})")]
    NoConvergence { steps: usize, residual: f64 },

    /// Every path of an ensemble diverged.
    #[error("all {paths} paths diverged")]
    AllPathsDiverged { paths: usize },

    /// A snapshot file could not be parsed.
    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for the CLI: 2 config, 3 divergence, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Snapshot { .. } => 2,
            Error::Divergence { .. } | Error::AllPathsDiverged { .. } => 3,
            Error::NoConvergence { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
