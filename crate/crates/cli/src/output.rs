//! CSV tables and the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so identical
//! inputs give byte-identical files. Timestamps appear only in `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Column order of every per-episode file.
pub const EPISODE_HEADER: [&str; 11] = [
    "pacer",
    "env",
    "T",
    "seed",
    "reward",
    "spend",
    "ros_violation",
    "tau",
    "endurance_gap",
    "relative_ros_error",
    "benchmark",
];

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// An in-memory table written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
    rows: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    config_sha256: String,
    created_unix: u64,
    files: Vec<FileEntry>,
}

/// Write `tables` as CSV files under `dir` plus a `manifest.json` describing them.
pub fn write_outputs<C: Serialize>(
    dir: &Path,
    command: &str,
    config: &C,
    tables: &[Table],
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(tables.len() + 1);
    let mut files = Vec::with_capacity(tables.len());
    for t in tables {
        let bytes = t.to_bytes()?;
        let path = dir.join(format!("{}.csv", t.name));
        std::fs::write(&path, &bytes)?;
        files.push(FileEntry {
            name: format!("{}.csv", t.name),
            sha256: sha256_hex(&bytes),
            rows: t.rows.len(),
        });
        paths.push(path);
    }
    let config_json = serde_json::to_vec(config).map_err(|e| CliError::Io(e.into()))?;
    let manifest = Manifest {
        tool: "dualpace",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        config_sha256: sha256_hex(&config_json),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        files,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.into()))?;
    std::fs::write(&path, text)?;
    paths.push(path);
    Ok(paths)
}
