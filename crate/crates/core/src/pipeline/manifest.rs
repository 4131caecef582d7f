use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance record written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub version: String,
    pub stages: Vec<StageTiming>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn new(command: &str, canonical_config: &str) -> Self {
        Self {
            command: command.to_string(),
            config_hash: sha256_hex(canonical_config.as_bytes()),
            version: env!("CARGO_PKG_VERSION").to_string(),
            stages: Vec::new(),
            files: Vec::new(),
        }
    }

    /// Runs `f` and records its wall-clock time under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.stages.push(StageTiming { stage: stage.to_string(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Recomputes every listed checksum under `dir`; returns the paths that differ or are missing.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| std::fs::read(dir.join(&f.path)).map(|b| sha256_hex(&b) != f.sha256).unwrap_or(true))
            .map(|f| f.path.clone())
            .collect()
    }
}

/// Writes files into one directory and records them in a manifest.
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&self, manifest: &mut RunManifest, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes)?;
        manifest.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(path)
    }

    /// Writes the manifest itself as `{command}_manifest.json`.
    pub fn finish(&self, manifest: &RunManifest) -> Result<PathBuf> {
        let path = self.root.join(format!("{}_manifest.json", manifest.command));
        std::fs::write(&path, manifest.to_json())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn written_files_verify() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(dir.path()).unwrap();
        let mut m = RunManifest::new("simulate", "x");
        out.write(&mut m, "a.csv", b"k,re,im\n").unwrap();
        out.finish(&m).unwrap();
        assert!(m.verify(dir.path()).is_empty());
        std::fs::write(dir.path().join("a.csv"), b"tampered").unwrap();
        assert_eq!(m.verify(dir.path()), vec!["a.csv".to_string()]);
        let json: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulate_manifest.json")).unwrap()).unwrap();
        assert_eq!(json, m);
    }
}
