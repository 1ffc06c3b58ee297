//! Deterministic report output: one flat CSV of numeric results plus a JSON
//! report embedding the fully resolved configuration.
//!
//! All writes are atomic (temp file + rename) and all formatting is
//! locale-free, so identical runs produce byte-identical files.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// One numeric result row.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub measure: String,
    pub field: String,
    pub functional: String,
    pub p: String,
    pub resolution: String,
    pub value: f64,
}

impl CsvRow {
    pub fn new(
        measure: impl Into<String>,
        field: impl Into<String>,
        functional: impl Into<String>,
        p: impl Into<String>,
        resolution: impl Into<String>,
        value: f64,
    ) -> Self {
        Self {
            measure: measure.into(),
            field: field.into(),
            functional: functional.into(),
            p: p.into(),
            resolution: resolution.into(),
            value,
        }
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Write rows as CSV with a fixed header.
pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["measure", "field", "functional", "p", "resolution", "value"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.measure.as_str(),
            r.field.as_str(),
            r.functional.as_str(),
            r.p.as_str(),
            r.resolution.as_str(),
            // shortest round-trip float formatting: deterministic and exact
            &format!("{}", r.value),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| {
        crate::error::Error::Config(format!("csv buffer error: {e}"))
    })?;
    atomic_write(path, &bytes)
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Config(format!("csv write error: {e}"))
}

/// Write any serializable payload as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, payload: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(payload)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}
