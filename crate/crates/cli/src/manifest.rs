//! Run manifests: the reproducibility ledger written next to artifacts.
//!
//! A manifest records the canonical command line, the tool version, the
//! master seed when one exists, and a content digest for every file the
//! command read or wrote. Entries are sorted and carry no timestamps or
//! host details, so reruns produce byte-identical manifests.

use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: String, master_seed: Option<u64>) -> Self {
        Self {
            command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> anyhow::Result<()> {
        self.inputs.push(digest_entry(path)?);
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) -> anyhow::Result<()> {
        self.outputs.push(digest_entry(path)?);
        Ok(())
    }

    /// Writes the manifest as pretty JSON, entries sorted by path.
    pub fn write(&mut self, path: &Path) -> anyhow::Result<()> {
        self.inputs.sort_by(|a, b| a.path.cmp(&b.path));
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let mut body = serde_json::to_string_pretty(self).context("serializing manifest")?;
        body.push('\n');
        std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn digest_entry(path: &Path) -> anyhow::Result<FileDigest> {
    let bytes =
        std::fs::read(path).with_context(|| format!("digesting {}", path.display()))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}
