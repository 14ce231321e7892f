//! Atomic output writing and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub wall_time_s: f64,
    pub threads: usize,
    pub files: Vec<FileEntry>,
    pub summary: serde_json::Value,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Writes every file, then the manifest listing them; returns its path.
pub fn write_outputs(dir: &Path, files: &[(String, Vec<u8>)], mut manifest: Manifest) -> Result<PathBuf, CliError> {
    manifest.files.clear();
    for (name, bytes) in files {
        write_atomic(&dir.join(name), bytes)?;
        manifest.files.push(FileEntry { path: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
    }
    let path = dir.join(MANIFEST_NAME);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// Re-reads a manifest and checks every listed file against its hash.
pub fn validate_manifest(path: &Path) -> Result<Manifest, CliError> {
    let bad = |message: String| CliError::Manifest { path: path.to_path_buf(), message };
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    for entry in &manifest.files {
        if Path::new(&entry.path).components().any(|c| !matches!(c, std::path::Component::Normal(_))) {
            return Err(bad(format!("{} is not a plain relative path", entry.path)));
        }
        let file = dir.join(&entry.path);
        let bytes = fs::read(&file).map_err(io_err(&file))?;
        if bytes.len() as u64 != entry.bytes || sha256_hex(&bytes) != entry.sha256 {
            return Err(bad(format!("{} does not match its recorded hash", entry.path)));
        }
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> Manifest {
        Manifest {
            tool: "qcompress".into(),
            version: "0".into(),
            experiment: "eigs".into(),
            seed: 1,
            config: serde_json::json!({}),
            wall_time_s: 0.0,
            threads: 1,
            files: Vec::new(),
            summary: serde_json::json!({}),
        }
    }

    #[test]
    fn round_trip_and_tamper() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![("a.csv".to_string(), b"x,y\n1,2\n".to_vec())];
        let path = write_outputs(dir.path(), &files, manifest()).unwrap();
        let m = validate_manifest(&path).unwrap();
        assert_eq!(m.files[0].sha256, sha256_hex(b"x,y\n1,2\n"));
        assert!(!dir.path().join(".a.csv.tmp").exists());
        fs::write(dir.path().join("a.csv"), b"x,y\n1,3\n").unwrap();
        assert!(validate_manifest(&path).is_err());
    }
}
