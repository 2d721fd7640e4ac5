use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub experiment: String,
    pub figure: String,
    /// Resolved configuration echo.
    pub config: serde_json::Value,
    pub software_version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputRecord>,
}

/// First 16 hex digits of the SHA-256 of the resolved config.
pub fn run_id<T: Serialize>(config: &T) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))[..16].to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files produced by one run, written together or not at all.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_slice())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Write every file into `dir`; on the first failure remove whatever
    /// was already written.
    pub fn write(&self, dir: &Path) -> Result<Vec<OutputRecord>> {
        std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
        let mut written: Vec<PathBuf> = Vec::new();
        let mut records = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(e) = std::fs::write(&path, bytes) {
                remove_all(&written);
                return Err(HarnessError::io(&path)(e));
            }
            written.push(path);
            records.push(OutputRecord {
                path: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            });
        }
        Ok(records)
    }
}

pub fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        if let Err(e) = std::fs::remove_file(p) {
            log::warn!("could not remove partial output {}: {e}", p.display());
        }
    }
}
