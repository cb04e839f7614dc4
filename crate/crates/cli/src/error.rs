use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Data {
        context: String,
        #[source]
        source: fj_core::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn data(context: impl Into<String>, source: fj_core::Error) -> Self {
        CliError::Data {
            context: context.into(),
            source,
        }
    }

    /// 2 usage, 3 data, 4 capacity guard.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data {
                source: fj_core::Error::Capacity { .. },
                ..
            } => 4,
            CliError::Io { .. } | CliError::Data { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a context string to core errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for fj_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::data(what(), e))
    }
}
