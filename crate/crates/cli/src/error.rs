use std::fmt;
use std::path::{Path, PathBuf};

use bpgc_core::BpgcError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unparseable input.
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Model(BpgcError),
    /// The run finished and reported, but did not meet its success criterion.
    Incomplete(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Model(BpgcError::DidNotConverge(_)) => 4,
            CliError::Model(_) => 2,
            CliError::Incomplete(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Incomplete(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<BpgcError> for CliError {
    fn from(e: BpgcError) -> Self {
        CliError::Model(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
