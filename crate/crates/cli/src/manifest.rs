//! Run directories, their manifests and checksum verification.

use crate::config::ExperimentConfig;
use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub experiment_id: String,
    pub experiment: String,
    pub tool_version: String,
    /// Unix seconds.
    pub started: u64,
    pub finished: u64,
    pub config: ExperimentConfig,
    pub artifacts: Vec<Artifact>,
    pub pass: bool,
    pub errors: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Artifacts whose file is missing or no longer matches its checksum.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.artifacts
            .iter()
            .filter(|a| match fs::read(dir.join(&a.path)) {
                Ok(bytes) => bytes.len() as u64 != a.bytes || sha256_hex(&bytes) != a.sha256,
                Err(_) => true,
            })
            .map(|a| a.path.clone())
            .collect()
    }

    /// Exit status: 0 when every criterion passed without errors, 1 when a
    /// criterion failed, 2 on errors.
    pub fn exit_code(&self) -> u8 {
        if !self.errors.is_empty() {
            2
        } else if self.pass {
            0
        } else {
            1
        }
    }
}

/// The only place files of a run are written.
#[derive(Debug)]
pub struct RunWriter {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl RunWriter {
    /// Creates the run directory. Runs are immutable, so a directory that
    /// already holds a manifest is refused.
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        if dir.join(MANIFEST_FILE).exists() {
            return Err(CliError::RunExists(dir.to_path_buf()));
        }
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.record(name, bytes);
        Ok(path)
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }

    /// Records a file some other routine has written into the directory.
    pub fn adopt(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let name = path
            .strip_prefix(&self.dir)
            .unwrap_or(path)
            .to_string_lossy()
            .into_owned();
        self.record(&name, &bytes);
        Ok(())
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest, CliError> {
        manifest.artifacts = self.artifacts;
        let path = self.dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(manifest)
    }
}
