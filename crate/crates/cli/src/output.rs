//! CSV tables with a commented metadata block.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::CliResult;

/// Metadata written at the top of every output file.
#[derive(Debug, Clone)]
pub struct Meta {
    pub command: &'static str,
    pub config_sha256: String,
    pub timestamp: bool,
}

impl Meta {
    fn write_block(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# kkwin {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# config_sha256: {}", self.config_sha256)?;
        if self.timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            writeln!(out, "# timestamp_unix: {secs}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path, name: &str, meta: &Meta) -> CliResult<PathBuf> {
        let path = dir.join(name);
        let mut buf = Vec::new();
        meta.write_block(&mut buf)?;
        writeln!(buf, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(buf, "{}", r.join(","))?;
        }
        fs::write(&path, buf)?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}

/// Shortest representation that round-trips; `NaN` for missing values.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Quotes a free-text field when it would break the row.
pub fn text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

/// Dataset in the `nk` schema, preceded by the metadata block.
pub fn write_dataset(dir: &Path, name: &str, meta: &Meta, data: &kkwin::OpticalDataset) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let mut buf = Vec::new();
    meta.write_block(&mut buf)?;
    kkwin::ingest::write_dataset(data, &mut buf).map_err(crate::error::CliError::compute)?;
    fs::write(&path, buf)?;
    log::info!("wrote {}", path.display());
    Ok(path)
}
