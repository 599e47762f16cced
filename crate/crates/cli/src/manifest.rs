use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::args::Settings;
use crate::cache::sha256_hex;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub wall_s: f64,
    pub surfaces_cached: bool,
}

/// Record of one run. Its `config` section can be passed back through
/// `--config` to repeat the run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Settings,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub seed: Option<u64>,
    pub timing: Option<Timing>,
}

impl RunManifest {
    pub fn new(command: &str, config: Settings) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed: config.seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timing: None,
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest { path: path.to_path_buf(), sha256: sha256_hex(bytes) });
    }

    /// Writes `bytes` to `dir/name` and records its digest.
    pub fn emit(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(FileDigest { path: PathBuf::from(name), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn finish(self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self)?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
