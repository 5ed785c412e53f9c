//! Reproducibility manifest: every command records its config hash, the
//! seeds in effect, and the artifacts it wrote (with their format-version
//! first lines), enough to regenerate the outputs byte-for-byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use scatfit_core::{Error, Result};
use sha2::{Digest, Sha256};

pub struct Manifest {
    command: String,
    config_path: PathBuf,
    config_sha256: String,
    lines: Vec<String>,
    artifacts: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &str, config_path: &Path, config_bytes: &[u8]) -> Self {
        let mut h = Sha256::new();
        h.update(config_bytes);
        Self {
            command: command.to_string(),
            config_path: config_path.to_path_buf(),
            config_sha256: format!("{:x}", h.finalize()),
            lines: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key} {value}"));
    }

    pub fn artifact(&mut self, path: impl Into<PathBuf>) {
        self.artifacts.push(path.into());
    }

    pub fn artifacts_mut(&mut self, paths: impl IntoIterator<Item = PathBuf>) {
        self.artifacts.extend(paths);
    }

    /// Writes `manifest-<command>.txt` into `out_dir` and returns its path.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let mut text = String::from("# run-manifest version 1\n");
        let _ = writeln!(text, "command {}", self.command);
        let _ = writeln!(text, "config {}", self.config_path.display());
        let _ = writeln!(text, "config-sha256 {}", self.config_sha256);
        for line in &self.lines {
            let _ = writeln!(text, "{line}");
        }
        for a in &self.artifacts {
            let version = artifact_version(a);
            let rel = a.strip_prefix(out_dir).unwrap_or(a);
            let _ = writeln!(text, "artifact {} {}", rel.display(), version);
        }
        let path = out_dir.join(format!("manifest-{}.txt", self.command));
        std::fs::write(&path, text)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// First line of a text artifact, used as its format-version stamp.
fn artifact_version(path: &Path) -> String {
    std::fs::read_to_string(path)
        .ok()
        .and_then(|t| t.lines().next().map(|l| l.trim_start_matches("# ").to_string()))
        .unwrap_or_else(|| "unknown".to_string())
}
