//! Output files, digests, and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Per-check outcome recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct CheckStatus {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

/// Manifest written next to every run's outputs. The wall time is the one
/// intentionally non-reproducible field.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub wall_time_ms: u128,
    pub checks: Vec<CheckStatus>,
    pub outputs: Vec<OutputDigest>,
}

/// Collects output files for one run and finalizes the manifest.
pub struct RunWriter {
    out_dir: PathBuf,
    command: String,
    config: serde_json::Value,
    started: Instant,
    checks: Vec<CheckStatus>,
    outputs: Vec<OutputDigest>,
}

impl RunWriter {
    pub fn new(out_dir: &Path, command: &str, config: serde_json::Value) -> anyhow::Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(RunWriter {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            config,
            started: Instant::now(),
            checks: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Writes a file and records its digest.
    pub fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)?;
        let digest = Sha256::digest(contents.as_bytes());
        self.outputs.push(OutputDigest {
            path: name.to_string(),
            sha256: hex::encode(digest),
        });
        Ok(path)
    }

    pub fn record_check(&mut self, name: &str, pass: bool) {
        self.checks.push(CheckStatus {
            name: name.to_string(),
            pass,
        });
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes `manifest.json` and returns whether every check passed.
    pub fn finalize(self) -> anyhow::Result<bool> {
        let all_pass = self.all_checks_pass();
        let manifest = RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            config: self.config,
            wall_time_ms: self.started.elapsed().as_millis(),
            checks: self.checks,
            outputs: self.outputs,
        };
        let path = self.out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(all_pass)
    }
}

/// Renders a float for CSV: shortest representation that round-trips.
pub fn fmt(x: f64) -> String {
    format!("{x}")
}
