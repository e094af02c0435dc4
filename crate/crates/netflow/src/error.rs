use std::io;
use std::path::PathBuf;

use netflow_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 bad input, 3 numerical failure, 4 failed
    /// assertion, 1 anything else (I/O).
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                CoreError::Numeric(_) | CoreError::Degenerate(_) => 3,
                CoreError::Input(_)
                | CoreError::Dimension { .. }
                | CoreError::State(_)
                | CoreError::Scenario(_) => 2,
            },
            CliError::Parse { .. } | CliError::Config(_) => 2,
            CliError::Assertion(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}
