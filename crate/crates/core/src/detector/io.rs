use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LinearModel;
use crate::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    #[serde(flatten)]
    model: LinearModel,
}

impl LinearModel {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&ModelFile {
            version: MODEL_VERSION,
            model: self.clone(),
        })
        .map_err(|e| Error::json("model", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::json("model", e))?;
        if file.version != MODEL_VERSION {
            return Err(Error::InvalidInput(format!(
                "model file version {} is not supported (expected {MODEL_VERSION})",
                file.version
            )));
        }
        file.model.validate()?;
        Ok(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Writes `frequency_hz,weight` rows; values use shortest round-trip formatting.
pub fn write_weights_csv(path: &Path, rows: &[(f64, f64)]) -> Result<()> {
    let mut out = String::from("frequency_hz,weight\n");
    for (f, w) in rows {
        writeln!(out, "{f},{w}").expect("writing to a String cannot fail");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// One row per bin in frequency order.
pub fn export_weights(model: &LinearModel, path: &Path) -> Result<()> {
    let rows: Vec<(f64, f64)> = model
        .bin_frequencies
        .iter()
        .copied()
        .zip(model.weights.iter().copied())
        .collect();
    write_weights_csv(path, &rows)
}

pub fn import_weights(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("frequency_hz,weight") {
        return Err(Error::InvalidInput(format!(
            "{}: missing frequency_hz,weight header",
            path.display()
        )));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = || {
                Error::InvalidInput(format!(
                    "{} line {}: expected two numbers",
                    path.display(),
                    i + 2
                ))
            };
            let (a, b) = l.split_once(',').ok_or_else(bad)?;
            Ok((
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}
