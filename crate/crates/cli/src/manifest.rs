//! Provenance sidecars for output files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!("misig ", env!("CARGO_PKG_VERSION"), "-", env!("MISIG_GIT_DESCRIBE"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// SHA-256 of the input file, 64 hex digits.
    pub input_digest: Option<String>,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub notes: Vec<String>,
}

/// `<output>.manifest.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_sidecar(output: &Path, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let path = sidecar_path(output);
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}
