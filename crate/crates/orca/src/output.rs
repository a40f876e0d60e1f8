//! Output files. Every file carries the tool version and the SHA-256 of the
//! resolved configuration, so identical inputs give byte-identical outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{OrcaError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub orca_version: String,
    pub config_sha256: String,
}

impl Provenance {
    /// Hash of the canonical JSON form of the resolved configuration.
    pub fn of<T: Serialize>(config: &T) -> Result<Self> {
        let text = serde_json::to_string(config).map_err(|e| OrcaError::Config(e.to_string()))?;
        let digest = Sha256::digest(text.as_bytes());
        let hex = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Ok(Self { orca_version: VERSION.into(), config_sha256: hex })
    }

    pub fn comment(&self) -> String {
        format!("# orca {} config_sha256 {}\n", self.orca_version, self.config_sha256)
    }
}

/// A CSV table with its provenance comment line.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, prov: &Provenance) -> String {
        let mut s = prov.comment();
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip float formatting.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| OrcaError::Numerical(e.to_string()))?;
    text.push('\n');
    write_file(dir, name, &text)
}

/// JSON report with the provenance fields first and the resolved config echoed.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    #[serde(flatten)]
    pub provenance: &'a Provenance,
    pub command: &'a str,
    pub config: &'a C,
    #[serde(flatten)]
    pub report: &'a R,
}
