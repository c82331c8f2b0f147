use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Blowup,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub version: String,
    pub config_path: Option<String>,
    pub config: std::collections::BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub started: String,
    pub finished: String,
    pub status: Status,
    pub message: Option<String>,
}

/// Content hash of the command, the canonical configuration and the build version.
pub fn run_id(command: &str, canonical_config: &str) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(b"\n");
    h.update(canonical_config.as_bytes());
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    hex::encode(h.finalize())
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Create the run directory, refusing to reuse an existing one unless `force`.
pub fn prepare_dir(root: &Path, name: &str, force: bool) -> Result<PathBuf, CliError> {
    let dir = root.join(name);
    if dir.exists() {
        if !force {
            return Err(CliError::Validation(format!(
                "output directory {} already exists; pass --force to overwrite",
                dir.display()
            )));
        }
        fs::remove_dir_all(&dir).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        fs::write(dir.join("manifest.json"), text + "\n")
            .map_err(|e| CliError::Internal(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_id_is_stable_and_sensitive() {
        let a = run_id("simulate", "seed=1\n");
        assert_eq!(a, run_id("simulate", "seed=1\n"));
        assert_ne!(a, run_id("simulate", "seed=2\n"));
        assert_ne!(a, run_id("sweep", "seed=1\n"));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn existing_directory_needs_force() {
        let root = tempfile::tempdir().unwrap();
        prepare_dir(root.path(), "run", false).unwrap();
        assert!(prepare_dir(root.path(), "run", false).is_err());
        assert!(prepare_dir(root.path(), "run", true).is_ok());
    }
}
