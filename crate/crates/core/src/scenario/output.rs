//! Result tables and the run manifest.
//!
//! Every table is written once per configured format as
//! `<dir>/<name>.<ext>` with a header row. Floats use Rust's shortest
//! round-trip formatting so identical runs produce identical bytes.
//! `manifest.json` lists every file with its SHA-256.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ScenarioConfig, TableFormat};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const FORMAT_VERSION: u32 = 1;

/// A rectangular table of already-formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// All cells of a column parsed as floats.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        self.rows.iter().map(|r| r[c].parse().ok()).collect()
    }

    pub fn render(&self, format: TableFormat) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().delimiter(format.delimiter()).terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Formats a float cell.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Everything one scenario run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub scenario: String,
    pub seed: Option<u64>,
    pub tables: Vec<Table>,
    /// Scalar results, also emitted as the `summary` table.
    pub metrics: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl ResultBundle {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        Self { scenario: cfg.scenario.name().into(), seed: cfg.seed(), tables: Vec::new(), metrics: Vec::new(), notes: Vec::new() }
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn set(&mut self, name: &str, value: f64) {
        match self.metrics.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = value,
            None => self.metrics.push((name.into(), value)),
        }
    }

    fn summary(&self) -> Table {
        let mut t = Table::new("summary", &["metric", "value"]);
        for (k, v) in &self.metrics {
            t.push(vec![k.clone(), num(*v)]);
        }
        t
    }

    /// Data tables followed by the summary table.
    pub fn all_tables(&self) -> Vec<Table> {
        let mut out = self.tables.clone();
        out.push(self.summary());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: String,
    pub scenario: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub wall_time_seconds: f64,
    pub complete: bool,
    pub error: Option<String>,
    pub notes: Vec<String>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes all tables and the manifest into `dir`, creating it if needed.
pub fn write_bundle(
    bundle: &ResultBundle,
    cfg: &ScenarioConfig,
    dir: &Path,
    wall_time_seconds: f64,
    error: Option<String>,
) -> io::Result<(Manifest, PathBuf)> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for table in bundle.all_tables() {
        for &format in &cfg.output.formats {
            let name = format!("{}.{}", table.name, format.extension());
            let bytes = table.render(format);
            fs::write(dir.join(&name), &bytes)?;
            files.push(FileEntry { name, rows: table.rows.len(), sha256: sha256_hex(&bytes) });
        }
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        scenario: bundle.scenario.clone(),
        config_sha256: sha256_hex(cfg.to_toml().as_bytes()),
        seed: bundle.seed,
        wall_time_seconds,
        complete: error.is_none(),
        error,
        notes: bundle.notes.clone(),
        files,
    };
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, serde_json::to_vec_pretty(&manifest).expect("manifest serializes"))?;
    Ok((manifest, path))
}
