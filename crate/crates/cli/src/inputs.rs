use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use peakprint::audio::read_manifest;
use peakprint::fingerprint::{read_records, FingerprintConfig, FingerprintRecord};

use crate::UsageError;

/// Fails with a usage error when `path` does not exist.
pub fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(UsageError(format!("{} does not exist", path.display())).into())
    }
}

pub fn is_jsonl(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("jsonl"))
}

/// An audio file and its label.
pub struct AudioItem {
    pub path: PathBuf,
    pub label: String,
}

/// Expands a WAV file, a directory of WAV files or a manifest into audio items.
pub fn audio_items(input: &Path, default_label: &str) -> Result<Vec<AudioItem>> {
    require(input)?;
    let items = if input.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(input)
            .with_context(|| format!("listing {}", input.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")))
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|path| AudioItem {
                path,
                label: default_label.to_string(),
            })
            .collect()
    } else if is_jsonl(input) {
        read_manifest(input)?
            .into_iter()
            .map(|e| AudioItem {
                path: e.path,
                label: e.label,
            })
            .collect()
    } else {
        vec![AudioItem {
            path: input.to_path_buf(),
            label: default_label.to_string(),
        }]
    };
    if items.is_empty() {
        return Err(UsageError(format!("no audio found in {}", input.display())).into());
    }
    Ok(items)
}

/// Reads fingerprint records when `path` holds them, `None` when it is a
/// manifest of audio files instead.
pub fn try_records(path: &Path) -> Result<Option<Vec<FingerprintRecord>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let first = text.lines().find(|l| !l.trim().is_empty());
    let Some(first) = first else {
        return Err(UsageError(format!("{} is empty", path.display())).into());
    };
    let value: serde_json::Value = serde_json::from_str(first)
        .with_context(|| format!("{}: first line is not JSON", path.display()))?;
    if value.get("values").is_some() {
        Ok(Some(read_records(path)?))
    } else {
        Ok(None)
    }
}

pub fn load_fingerprint_config(path: Option<&Path>) -> Result<Option<FingerprintConfig>> {
    let Some(path) = path else { return Ok(None) };
    require(path)?;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: FingerprintConfig = serde_json::from_str(&text).map_err(|e| {
        UsageError(format!(
            "{}: invalid fingerprint config: {e}",
            path.display()
        ))
    })?;
    cfg.validate()?;
    Ok(Some(cfg))
}
