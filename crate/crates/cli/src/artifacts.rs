//! Atomic artifact writes and the append-only run manifest.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRef {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// One line of `manifest.jsonl`, written after the artifacts it lists.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub table_checksum: Option<String>,
    pub tool_version: String,
    pub timestamp_unix: u64,
    pub artifacts: Vec<ArtifactRef>,
}

impl RunManifest {
    pub fn new(config: &serde_json::Value, seed: Option<u64>, table_checksum: Option<u32>) -> RunManifest {
        let canonical = serde_json::to_vec(config).expect("config serializes");
        RunManifest {
            command_line: std::env::args().collect(),
            config_digest: sha256_hex(&canonical),
            seed,
            table_checksum: table_checksum.map(|c| format!("{c:08x}")),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            artifacts: Vec::new(),
        }
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Directories that `create_dir_all(dir)` would create, outermost first.
fn missing_ancestors(dir: &Path) -> Vec<PathBuf> {
    let mut missing: Vec<PathBuf> =
        dir.ancestors().take_while(|a| !a.as_os_str().is_empty() && !a.exists()).map(Path::to_path_buf).collect();
    missing.reverse();
    missing
}

fn parent_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes every file and then appends the manifest line to `manifest.jsonl`
/// next to the first file. Either all of it lands or none of it does.
pub fn commit(files: Vec<(PathBuf, Vec<u8>)>, mut manifest: RunManifest) -> Result<(), CliError> {
    let Some(first) = files.first() else { return Ok(()) };
    let manifest_path = parent_of(&first.0).join(MANIFEST_FILE);
    let mut created: Vec<PathBuf> = Vec::new();
    let result = stage_and_persist(&files, &manifest_path, &mut manifest, &mut created);
    if result.is_err() {
        for dir in created.iter().rev() {
            let _ = fs::remove_dir(dir);
        }
    }
    result
}

fn stage_and_persist(
    files: &[(PathBuf, Vec<u8>)],
    manifest_path: &Path,
    manifest: &mut RunManifest,
    created: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = parent_of(path);
        let missing = missing_ancestors(&dir);
        if !missing.is_empty() {
            fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
            created.extend(missing);
        }
        let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| io(&dir, e))?;
        tmp.write_all(bytes).and_then(|_| tmp.as_file().sync_all()).map_err(|e| io(path, e))?;
        staged.push((tmp, path.clone()));
        manifest.artifacts.push(ArtifactRef {
            path: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
    }
    let mut line = serde_json::to_string(manifest).expect("manifest serializes");
    line.push('\n');

    let mut landed: Vec<PathBuf> = Vec::new();
    let rollback = |landed: &[PathBuf]| {
        for p in landed {
            let _ = fs::remove_file(p);
        }
    };
    for (tmp, path) in staged {
        if let Err(e) = tmp.persist(&path) {
            rollback(&landed);
            return Err(io(&path, e.error));
        }
        landed.push(path);
    }
    let appended = OpenOptions::new()
        .create(true)
        .append(true)
        .open(manifest_path)
        .and_then(|mut f| f.write_all(line.as_bytes()).and_then(|_| f.sync_all()));
    if let Err(e) = appended {
        rollback(&landed);
        return Err(io(manifest_path, e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_files_then_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("nested/run");
        let m = RunManifest::new(&serde_json::json!({"k": 1}), Some(7), Some(0xabc));
        commit(vec![(out.join("a.txt"), b"x".to_vec()), (out.join("b.txt"), b"yz".to_vec())], m).unwrap();
        assert_eq!(fs::read(out.join("a.txt")).unwrap(), b"x");
        let manifest = fs::read_to_string(out.join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.lines().count(), 1);
        let v: serde_json::Value = serde_json::from_str(manifest.trim()).unwrap();
        assert_eq!(v["seed"], 7);
        assert_eq!(v["table_checksum"], "00000abc");
        assert_eq!(v["artifacts"][1]["path"], "b.txt");
        assert_eq!(v["artifacts"][1]["sha256"], sha256_hex(b"yz"));
    }

    #[test]
    fn manifest_is_appended() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..3 {
            let m = RunManifest::new(&serde_json::json!({"i": i}), None, None);
            commit(vec![(dir.path().join("a.txt"), vec![i])], m).unwrap();
        }
        let manifest = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.lines().count(), 3);
    }

    #[test]
    fn failed_commit_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("blocker");
        fs::write(&blocker, b"file, not a directory").unwrap();
        let ok = dir.path().join("fresh/a.txt");
        let bad = blocker.join("b.txt");
        let m = RunManifest::new(&serde_json::json!({}), None, None);
        assert!(matches!(commit(vec![(ok, b"1".to_vec()), (bad, b"2".to_vec())], m), Err(CliError::Io(_))));
        assert!(!dir.path().join("fresh").exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
