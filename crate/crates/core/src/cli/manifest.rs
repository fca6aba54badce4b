//! Run manifests: identity, echoed configuration, timestamps and artifacts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::params::CUTOFF_VERSION;

/// Code version string hashed into every run id.
pub fn code_version() -> String {
    format!("rhlab {} ({CUTOFF_VERSION})", env!("CARGO_PKG_VERSION"))
}

/// `sha256(config bytes || 0 || overrides || 0 || version)` in hex. Overrides
/// are hashed as `key=value\n` in the order given.
pub fn run_id(config: &[u8], overrides: &[(String, String)], version: &str) -> String {
    let mut h = Sha256::new();
    h.update(config);
    h.update([0u8]);
    for (k, v) in overrides {
        h.update(format!("{k}={v}\n").as_bytes());
    }
    h.update([0u8]);
    h.update(version.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    /// `ok`, `checks-failed` or `error`.
    pub status: String,
    pub error: Option<String>,
    pub checks: Vec<Check>,
    /// Paths relative to the manifest's directory.
    pub artifacts: Vec<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.status == "ok"
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
