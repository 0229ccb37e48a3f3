//! Per-run manifest: what was run, with which configuration, on which
//! inputs, producing which outputs. Contains no timestamps so reruns are
//! byte-identical.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: &'static str,
    pub format_version: &'static str,
    pub config_sha256: String,
    pub config: RunConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<FileDigest, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

pub fn config_hash(config: &RunConfig) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    sha256_hex(&json)
}

/// Writes `manifest-<command>.json` into `out_dir`.
pub fn write(
    out_dir: &Path,
    command: &str,
    config: &RunConfig,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let manifest = Manifest {
        command: command.to_string(),
        tool_version: env!("CARGO_PKG_VERSION"),
        format_version: mtlue::embfile::FORMAT_VERSION,
        config_sha256: config_hash(config),
        config: config.clone(),
        inputs: inputs.iter().map(|p| file_digest(p)).collect::<Result<_, _>>()?,
        outputs: outputs.iter().map(|p| file_digest(p)).collect::<Result<_, _>>()?,
    };
    let path = out_dir.join(format!("manifest-{command}.json"));
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
