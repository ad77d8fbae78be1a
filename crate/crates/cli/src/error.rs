use std::io;
use std::path::Path;

use thiserror::Error;

/// Everything a command can fail with, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config values or unusable input data.
    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    /// A modelling assumption still failed after the allowed retries.
    #[error("assumption violated: {0}")]
    Assumption(String),

    /// A numerical routine failed in a way no input change can fix.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// `selfcheck` ran and at least one check failed.
    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    pub const EXIT_USAGE: i32 = 2;
    pub const EXIT_IO: i32 = 3;
    pub const EXIT_ASSUMPTION: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => Self::EXIT_USAGE,
            CliError::Io { .. } => Self::EXIT_IO,
            CliError::Assumption(_) => Self::EXIT_ASSUMPTION,
            CliError::Numerical(_) | CliError::ChecksFailed(_) => 1,
        }
    }

    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn write(path: &Path, source: io::Error) -> Self {
        Self::io(format!("cannot write {}", path.display()), source)
    }

    pub fn read(path: &Path, source: io::Error) -> Self {
        Self::io(format!("cannot read {}", path.display()), source)
    }
}

impl From<qnrate_core::Error> for CliError {
    fn from(e: qnrate_core::Error) -> Self {
        use qnrate_core::Error as E;
        match e {
            E::AssumptionViolated(msg) => CliError::Assumption(msg),
            E::InvalidParameter(_) | E::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            E::SingularPoint { .. } | E::SingularHessian | E::SingularInput(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
