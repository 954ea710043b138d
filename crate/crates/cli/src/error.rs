use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failures of a subcommand, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("self-test failed: {0} case(s) outside tolerance")]
    SelfTest(usize),

    #[error(transparent)]
    Core(#[from] fatune::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::MissingData(_) | CliError::Core(fatune::Error::MissingData(_)) => 4,
            CliError::SelfTest(_) | CliError::Core(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
