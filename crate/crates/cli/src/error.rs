use std::path::PathBuf;

use thiserror::Error;

/// Exit code for bad input, bad flags and validation failures.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for numerical failures during execution.
pub const EXIT_EXECUTION: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cmcs_core::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        use cmcs_core::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Io { .. } | CliError::Usage(_) => EXIT_INPUT,
            CliError::Core(e) => match e {
                E::NonFinite { .. }
                | E::DuplicateMethod(_)
                | E::Shape(_)
                | E::LengthMismatch { .. }
                | E::UnknownState(_)
                | E::InvalidArgument(_) => EXIT_INPUT,
                E::InsufficientData(_) | E::DegenerateVariance { .. } | E::NotPositiveDefinite { .. } => {
                    EXIT_EXECUTION
                }
            },
        }
    }
}
