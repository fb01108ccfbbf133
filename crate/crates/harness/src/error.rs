use std::path::PathBuf;

use lexinstruct_core::generate::GenError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {reason}", .path.display())]
    Malformed { path: PathBuf, line: usize, reason: String },
    #[error("{}:{line}: duplicate id `{id}`", .path.display())]
    DuplicateId { path: PathBuf, line: usize, id: String },
    #[error("{}:{line}: response id `{id}` has no instruction", .path.display())]
    UnknownId { path: PathBuf, line: usize, id: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error("{failed} of {attempted} requests failed")]
    Partial { failed: usize, attempted: usize },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> HarnessError {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn malformed(path: impl Into<PathBuf>, line: usize, reason: impl ToString) -> HarnessError {
        HarnessError::Malformed { path: path.into(), line, reason: reason.to_string() }
    }

    /// Process exit status: 1 usage/config, 2 data, 3 partial collection.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Generate(GenError::Config(_) | GenError::Templates(_) | GenError::MissingTemplate(_)) => 1,
            HarnessError::Partial { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
