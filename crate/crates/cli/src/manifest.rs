//! `manifest.toml`, written next to every command's outputs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{write_file, CliError};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub created_unix: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_override: Option<u64>,
    /// SHA-256 of each input asset, keyed by its resolved path.
    pub assets: BTreeMap<String, String>,
    pub config: Config,
}

impl Manifest {
    pub fn new(command: &str, config: &Config, seed_override: Option<u64>) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            seed_override,
            assets: BTreeMap::new(),
            config: config.clone(),
        }
    }

    pub fn add_asset(&mut self, name: &str, bytes: &[u8]) {
        self.assets.insert(name.into(), sha256_hex(bytes));
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text =
            toml::to_string(self).map_err(|e| CliError::Runtime(format!("manifest: {e}")))?;
        write_file(&dir.join(MANIFEST_FILE), &text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
