use std::path::Path;

/// CLI failure, split by exit code: bad invocation or input (2) versus a
/// failure while computing (1).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn cannot_open(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Usage(format!("cannot open {}: {err}", path.display()))
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("cannot write {}: {err}", path.display()))
    }
}

impl From<sensorplace::Error> for CliError {
    fn from(e: sensorplace::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
