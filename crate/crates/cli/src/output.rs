//! Output directory, written files and the JSON manifest.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Serialize)]
struct FileEntry {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: String,
    config: String,
    outputs: &'a [FileEntry],
    certificates: &'a serde_json::Value,
}

/// Collects the files of one command and finishes with `manifest.json`.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Outputs {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: contents.len(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
        });
        Ok(())
    }

    pub fn finish(self, command: &str, cfg: &RunConfig, certificates: serde_json::Value) -> anyhow::Result<PathBuf> {
        let manifest = Manifest {
            tool: "kdvist",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: cfg.hash(),
            config: cfg.canonical(),
            outputs: &self.files,
            certificates: &certificates,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// CSV field for a float: shortest round-trip form, `NaN` for missing values.
pub fn num(v: f64) -> String {
    kdvist::potential::fmt_f64(v)
}
