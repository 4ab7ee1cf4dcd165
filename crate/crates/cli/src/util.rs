//! File I/O with path-carrying errors, and the reproducibility manifest.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// I/O failure that remembers which path was involved; the CLI maps these
/// to exit code 2 and names the path in the error JSON.
#[derive(Debug)]
pub struct FileError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.source)
    }
}

impl std::error::Error for FileError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

pub fn read_to_string(path: &Path) -> Result<String, FileError> {
    std::fs::read_to_string(path).map_err(|source| FileError {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_string(path: &Path, contents: &str) -> Result<(), FileError> {
    std::fs::write(path, contents).map_err(|source| FileError {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sha256_hex(data: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data.as_bytes());
    hex::encode(hasher.finalize())
}

/// Reproducibility record written next to each output file: content hashes
/// of the inputs, the effective parameters, and the tool version. No
/// timestamps, so identical runs produce identical manifests.
#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub inputs: Vec<(String, String)>,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
}

impl Manifest {
    pub fn new(command: &str, params: serde_json::Value, seed: Option<u64>) -> Self {
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            params,
            seed,
        }
    }

    pub fn record_input(&mut self, path: &Path, contents: &str) {
        self.inputs
            .push((path.display().to_string(), sha256_hex(contents)));
    }

    pub fn write_next_to(&self, output: &Path) -> Result<(), FileError> {
        let mut path = output.as_os_str().to_owned();
        path.push(".manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serialization");
        write_string(Path::new(&path), &text)
    }
}
