use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to repeat a run: command, parameters, seeds and the
/// digests of what went in and came out. Deliberately has no timestamps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects outputs in memory and writes them, with the manifest, at the end.
pub struct Run {
    manifest: RunManifest,
    out_dir: PathBuf,
}

impl Run {
    pub fn new(command: &str, out_dir: &Path) -> Self {
        Self {
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                params: BTreeMap::new(),
                seeds: BTreeMap::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
            },
            out_dir: out_dir.to_path_buf(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.manifest
            .params
            .insert(key.to_string(), value.to_string());
    }

    pub fn seed(&mut self, key: &str, value: u64) {
        self.manifest.seeds.insert(key.to_string(), value);
    }

    pub fn input_digest(&mut self, path: &Path, sha256: String) {
        self.manifest.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256,
        });
    }

    pub fn output(&mut self, name: &str, bytes: Vec<u8>) -> std::io::Result<()> {
        fs::create_dir_all(&self.out_dir)?;
        fs::write(self.out_dir.join(name), &bytes)?;
        self.manifest.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn finish(self) -> std::io::Result<RunManifest> {
        let mut json = serde_json::to_vec_pretty(&self.manifest).map_err(std::io::Error::other)?;
        json.push(b'\n');
        fs::create_dir_all(&self.out_dir)?;
        fs::write(self.out_dir.join(MANIFEST_FILE), json)?;
        Ok(self.manifest)
    }
}
