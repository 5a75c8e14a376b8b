use crate::config::ConfigError;
use std::path::PathBuf;
use thiserror::Error;
use tubelab::LabError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("io: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("run-exists: {0} already holds a manifest")]
    RunExists(PathBuf),
    #[error("checksum-mismatch: {0:?}")]
    Tampered(Vec<String>),
    #[error("thread-pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn code(&self) -> &str {
        match self {
            CliError::Config(e) => e.violations.first().map(|v| v.code.as_str()).unwrap_or("config"),
            CliError::Lab(e) => e.code(),
            CliError::Io { .. } => "io",
            CliError::Json(_) => "json",
            CliError::RunExists(_) => "run-exists",
            CliError::Tampered(_) => "checksum-mismatch",
            CliError::Pool(_) => "thread-pool",
        }
    }
}
