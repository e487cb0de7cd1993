use std::path::PathBuf;

use edgesync_core::Error as CoreError;

/// Process exit codes. `2` is left to argument parsing.
pub mod exit {
    pub const OK: u8 = 0;
    pub const SCENARIO: u8 = 3;
    pub const DISCONNECTED: u8 = 4;
    pub const NUMERICAL: u8 = 5;
    pub const DIVERGED: u8 = 6;
    pub const IO: u8 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("the controller needs a connected graph, this one has {components} components")]
    Disconnected { components: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Scenario(_) => exit::SCENARIO,
            CliError::Disconnected { .. } => exit::DISCONNECTED,
            CliError::Core(CoreError::Diverged { .. }) => exit::DIVERGED,
            CliError::Core(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
