use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One line of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative paths are resolved against the manifest's directory.
    pub path: PathBuf,
    pub label: String,
    #[serde(default)]
    pub sample_rate: f64,
    #[serde(default)]
    pub duration_s: f64,
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for e in entries {
        serde_json::to_writer(&mut w, e).map_err(|err| Error::json("manifest entry", err))?;
        w.write_all(b"\n").map_err(|err| Error::io(path, err))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a JSONL manifest and resolves relative entry paths.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut entry: ManifestEntry = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{} line {}", path.display(), i + 1), e))?;
        if entry.label.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{} line {}: empty label",
                path.display(),
                i + 1
            )));
        }
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
        out.push(entry);
    }
    Ok(out)
}
