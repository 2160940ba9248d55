//! File output: atomic writes, content hashes, stage records and the run
//! manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::digest;
use crate::error::CliError;

/// One written file, relative to the output root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Writes `bytes` through a temporary sibling and a rename, so readers
/// never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(CliError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(CliError::io(path))
}

/// RFC-4180 CSV from a header and rows of already formatted fields.
pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Shortest text that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    x.to_string()
}

/// Tracks everything written below an output root.
#[derive(Debug)]
pub struct Writer {
    pub root: PathBuf,
    pub files: Vec<FileEntry>,
}

impl Writer {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into(), files: Vec::new() }
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.root.join(rel), bytes)?;
        self.files.retain(|f| f.path != rel);
        self.files.push(FileEntry { path: rel.to_string(), sha256: digest(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn write_json(&mut self, rel: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_vec_pretty(value).expect("serializable");
        text.push(b'\n');
        self.write(rel, &text)
    }

    pub fn write_csv<I, R>(&mut self, rel: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        self.write(rel, &csv_bytes(header, rows))
    }

    /// Files written under `dir/`.
    pub fn files_under(&self, dir: &str) -> Vec<FileEntry> {
        let prefix = format!("{dir}/");
        self.files.iter().filter(|f| f.path.starts_with(&prefix)).cloned().collect()
    }
}

/// Written last in each stage directory; a stage is a cache hit when its
/// record carries the current key and every listed file is intact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub key: String,
    pub files: Vec<FileEntry>,
}

pub const STAGE_RECORD: &str = "stage.json";

impl StageRecord {
    pub fn path(stage: &str) -> String {
        format!("{stage}/{STAGE_RECORD}")
    }

    /// Valid record for `key`, if one is on disk.
    pub fn find(root: &Path, stage: &str, key: &str) -> Option<StageRecord> {
        let text = fs::read(root.join(Self::path(stage))).ok()?;
        let rec: StageRecord = serde_json::from_slice(&text).ok()?;
        if rec.key != key {
            return None;
        }
        let intact = rec.files.iter().all(|f| fs::read(root.join(&f.path)).map(|b| digest(&b) == f.sha256).unwrap_or(false));
        intact.then_some(rec)
    }
}

/// Removes a stage directory before recomputing it, so stale files from an
/// earlier configuration cannot linger unlisted.
pub fn clear_stage(root: &Path, stage: &str) -> Result<(), CliError> {
    let dir = root.join(stage);
    match fs::remove_dir_all(&dir) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(CliError::io(dir)(e)),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageStatus {
    CacheHit,
    Computed,
    Failed,
    /// Nothing configured for this stage.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageEntry {
    pub stage: String,
    pub key: String,
    pub status: StageStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub software: String,
    pub version: String,
    pub config_hash: String,
    pub stages: Vec<StageEntry>,
    /// Every file of the run except the manifest itself.
    pub files: Vec<FileEntry>,
    pub error: Option<String>,
}

pub const MANIFEST: &str = "manifest.json";
