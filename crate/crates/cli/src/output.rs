use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

/// Shortest representation that parses back to the same `f64`.
pub fn real(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn persist(tmp: NamedTempFile, target: &Path) -> std::io::Result<PathBuf> {
    tmp.persist(target).map_err(|e| e.error)?;
    Ok(target.to_path_buf())
}

/// Writes a CSV next to its final location and renames it into place, so
/// an interrupted run never leaves a truncated file behind.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<PathBuf> {
    let tmp = NamedTempFile::new_in(dir)?;
    let mut w = csv::Writer::from_writer(tmp);
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row)?;
    }
    let tmp = w.into_inner().map_err(|e| e.into_error())?;
    persist(tmp, &dir.join(name))
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> std::io::Result<PathBuf> {
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    persist(tmp, &dir.join(name))
}
