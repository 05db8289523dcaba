use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Fingerprint, FingerprintConfig};
use crate::{Error, Result};

/// One line of a fingerprint JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintRecord {
    pub path: String,
    pub label: String,
    pub sample_rate: f64,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<FingerprintConfig>,
}

impl FingerprintRecord {
    pub fn new(path: impl Into<String>, label: impl Into<String>, fp: &Fingerprint) -> Self {
        Self {
            path: path.into(),
            label: label.into(),
            sample_rate: fp.source_rate,
            values: fp.values.clone(),
            config: Some(fp.config),
        }
    }

    /// Rebuilds the fingerprint, falling back to `default_config` when the
    /// record carries none.
    pub fn to_fingerprint(&self, default_config: &FingerprintConfig) -> Result<Fingerprint> {
        let cfg = self.config.unwrap_or(*default_config);
        Fingerprint::from_values(self.values.clone(), self.sample_rate, cfg)
    }
}

pub fn write_records(path: &Path, records: &[FingerprintRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::json("fingerprint record", e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a JSONL file; blank lines are skipped.
pub fn read_records(path: &Path) -> Result<Vec<FingerprintRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{} line {}", path.display(), i + 1), e))?;
        out.push(rec);
    }
    Ok(out)
}

/// Writes `frequency_hz,value` rows.
pub fn write_fingerprint_csv(path: &Path, fp: &Fingerprint) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "frequency_hz,value").map_err(io)?;
    for (f, v) in fp.bin_frequencies.iter().zip(&fp.values) {
        writeln!(w, "{f},{v}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads the `(frequency_hz, value)` pairs written by [`write_fingerprint_csv`].
pub fn read_fingerprint_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || {
            Error::InvalidInput(format!(
                "{} line {}: expected two numbers",
                path.display(),
                i + 1
            ))
        };
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        out.push((
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ));
    }
    Ok(out)
}
