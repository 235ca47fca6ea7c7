//! Run manifests: what was run, with which parameters, and digests of every
//! file it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST_VERSION: &str = "1.0";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub params: Value,
    pub outputs: Vec<OutputDigest>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}: not a manifest: {1}")]
    Parse(PathBuf, serde_json::Error),
    #[error("{path}: digest {actual} does not match recorded {expected}")]
    Mismatch { path: String, expected: String, actual: String },
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_name(command: &str) -> String {
    format!("{command}.manifest.json")
}

/// Writes files into one directory and remembers their digests.
pub struct OutputDir {
    root: PathBuf,
    outputs: Vec<OutputDigest>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, ManifestError> {
        fs::create_dir_all(root).map_err(|source| ManifestError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf, ManifestError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| ManifestError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, bytes).map_err(|source| ManifestError::Io {
            path: path.clone(),
            source,
        })?;
        self.outputs.push(OutputDigest {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    /// Writes `<command>.manifest.json` last and returns its path.
    pub fn finish(self, command: &str, argv: Vec<String>, seed: Option<u64>, params: Value) -> Result<PathBuf, ManifestError> {
        let manifest = RunManifest {
            format_version: MANIFEST_VERSION.to_string(),
            command: command.to_string(),
            argv,
            seed,
            params,
            outputs: self.outputs,
        };
        let path = self.root.join(manifest_name(command));
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|source| ManifestError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, ManifestError> {
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| ManifestError::Parse(path.to_path_buf(), e))
}

/// Recomputes every recorded digest against the files next to the manifest.
pub fn verify(path: &Path) -> Result<RunManifest, ManifestError> {
    let manifest = read_manifest(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    for out in &manifest.outputs {
        let file = dir.join(&out.path);
        let bytes = fs::read(&file).map_err(|source| ManifestError::Io { path: file, source })?;
        let actual = sha256_hex(&bytes);
        if actual != out.sha256 {
            return Err(ManifestError::Mismatch {
                path: out.path.clone(),
                expected: out.sha256.clone(),
                actual,
            });
        }
    }
    Ok(manifest)
}
