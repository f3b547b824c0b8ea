//! Run manifests: what a command read, wrote and was configured with,
//! plus content checksums, so a rerun can be verified byte-for-byte.
//!
//! The `timestamp` field is the run's resolved clock value; passing it
//! back through `--timestamp` (together with the recorded seed and
//! config) reproduces every output file exactly. Timings are
//! informational and excluded from any reproducibility comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clock;
use crate::exit::{CliError, Context};

pub const MANIFEST_VERSION: u32 = 1;

/// Content identity of one file at the time the command touched it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileStamp {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub created_at: String,
    /// Seconds since the Unix epoch behind `created_at`; feed it back
    /// via `--timestamp` to reproduce the run.
    pub timestamp: u64,
    pub seed: Option<u64>,
    /// Full effective configuration, defaults included.
    pub config: serde_json::Value,
    /// Input files by role (`input`, `schema`, ...).
    pub inputs: BTreeMap<String, FileStamp>,
    /// Output files by role (`model`, `report`, ...).
    pub outputs: BTreeMap<String, FileStamp>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        timestamp: u64,
        seed: Option<u64>,
        config: serde_json::Value,
    ) -> Self {
        RunManifest {
            format_version: MANIFEST_VERSION,
            tool: "flowmimic".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            created_at: clock::format_utc(timestamp),
            timestamp,
            seed,
            config,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, role: &str, path: &Path) -> Result<(), CliError> {
        self.inputs.insert(role.into(), stamp(path)?);
        Ok(())
    }

    pub fn add_output(&mut self, role: &str, path: &Path) -> Result<(), CliError> {
        self.outputs.insert(role.into(), stamp(path)?);
        Ok(())
    }

    pub fn add_timing(&mut self, name: &str, elapsed: Duration) {
        self.timings_ms.insert(name.into(), elapsed.as_millis() as u64);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Internal(format!("manifest serialization: {e}")))?;
        text.push('\n');
        fs::write(path, text).ctx(format!("writing manifest {}", path.display()))
    }
}

/// Checksum a file the command has just read or written.
pub fn stamp(path: &Path) -> Result<FileStamp, CliError> {
    let bytes = fs::read(path).ctx(format!("checksumming {}", path.display()))?;
    Ok(FileStamp {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}").expect("writing to a String cannot fail");
    }
    hex
}

/// Manifest location for a command whose primary output is one file:
/// the final extension gives way to `.manifest.json`, so
/// `teacher.model.json` sits next to `teacher.model.manifest.json`.
pub fn sibling_path(primary: &Path) -> PathBuf {
    match primary.file_stem() {
        Some(stem) => primary.with_file_name(format!("{}.manifest.json", stem.to_string_lossy())),
        None => primary.with_file_name("manifest.json"),
    }
}
