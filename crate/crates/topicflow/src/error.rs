//! Crate-wide error type.
//!
//! CLI exit codes map onto these variants: config/parse problems exit 2,
//! missing stage prerequisites exit 3, numerical failures exit 4.

use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad configuration value or unusable config file.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input data, with the 1-based line it came from.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A stage was requested before the stage that produces its input ran.
    #[error("missing prerequisite `{artifact}`: run the `{stage}` stage first")]
    MissingArtifact { artifact: String, stage: String },

    /// Training or evaluation produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Checkpoint format version does not match this build.
    #[error("checkpoint version mismatch: file has `{found}`, this build expects `{expected}`")]
    CheckpointVersion { found: String, expected: String },

    /// Checkpoint was produced against a different vocabulary.
    #[error("vocab hash mismatch: checkpoint has {found}, current vocab is {expected}")]
    VocabHash { found: String, expected: String },

    /// A run directory is already locked by another writer.
    #[error("run directory is locked by another process (lock file {0})")]
    RunLocked(PathBuf),

    /// Invalid argument to an operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::InvalidInput(_) => 2,
            Error::MissingArtifact { .. } => 3,
            Error::Numerical(_) => 4,
            _ => 1,
        }
    }
}
