use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unparseable or inconsistent configuration (exit 1).
    #[error("invalid value for `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("cannot read config file {path}: {source}")]
    ConfigFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("output directory {path} is not writable: {source}")]
    OutputDir {
        path: PathBuf,
        source: std::io::Error,
    },
    /// One or more cells failed to compute (exit 2).
    #[error("{0} cell(s) failed; see the run log")]
    Numerical(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Solver(#[from] fracstep::FracError),
}

impl CliError {
    pub fn config(key: &str, reason: impl Into<String>) -> Self {
        Self::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::ConfigFile { .. } | Self::OutputDir { .. } => 1,
            _ => 2,
        }
    }
}
