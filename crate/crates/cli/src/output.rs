//! CSV and JSON writers. Every file states its units.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use crate::UNITS;

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Serializes `rows` with a header, framed by `#` comment lines.
pub fn csv_text<T: Serialize>(rows: &[T], header: &[String], footer: &[String]) -> anyhow::Result<String> {
    let mut out = format!("# units: {UNITS}\n");
    for h in header {
        out.push_str(&format!("# {h}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    out.push_str(std::str::from_utf8(&w.into_inner()?)?);
    for f in footer {
        out.push_str(&format!("# {f}\n"));
    }
    Ok(out)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[String], footer: &[String]) -> anyhow::Result<()> {
    ensure_parent(path)?;
    fs::write(path, csv_text(rows, header, footer)?).with_context(|| format!("writing {}", path.display()))
}

/// Parses a CSV written by [`write_csv`], skipping comment lines.
pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}
