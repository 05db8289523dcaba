//! Artifact fingerprints: the frame-averaged log spectrum with its sliding
//! local-minimum baseline removed, restricted to a frequency band.
//!
//! Averaging many frames washes out melodic content and leaves a smooth,
//! decaying spectrum; periodic artifacts survive the averaging as narrow
//! peaks and are all that is left once the local floor is subtracted.

mod io;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::deconv::{
    default_min_prominence, jaccard_overlap, match_count, measure_peaks_mirrored, peak_recall,
    predict_peaks, predicted_bins,
};
use crate::signal::{
    average_frame_spectrum_with, log_magnitude, FrameOptions, Signal, Window, DEFAULT_EPSILON,
};
use crate::{Error, Result};

pub use io::{
    read_fingerprint_csv, read_records, write_fingerprint_csv, write_records, FingerprintRecord,
};

/// Peaks within this many bins are considered the same peak.
pub const BIN_TOLERANCE: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FingerprintConfig {
    /// Samples per frame; a power of two.
    pub frame_len: usize,
    pub band_low: f64,
    pub band_high: f64,
    /// Width in bins of the sliding minimum; odd, at least 3.
    pub min_window: usize,
    pub epsilon: f64,
    pub window: Window,
    pub overlap: f64,
}

impl Default for FingerprintConfig {
    fn default() -> Self {
        Self {
            frame_len: 8192,
            band_low: 5000.0,
            band_high: 16000.0,
            min_window: 11,
            epsilon: DEFAULT_EPSILON,
            window: Window::Rectangular,
            overlap: 0.0,
        }
    }
}

impl FingerprintConfig {
    /// Default band for a sample rate: 5-16 kHz for full-band audio,
    /// 1-8 kHz for 16 kHz material. The upper edge is clamped to Nyquist.
    pub fn for_rate(sample_rate: f64) -> Self {
        let nyquist = sample_rate / 2.0;
        let (low, high): (f64, f64) = if sample_rate >= 32000.0 {
            (5000.0, 16000.0)
        } else {
            (1000.0, 8000.0)
        };
        Self {
            band_low: low.min(nyquist / 2.0),
            band_high: high.min(nyquist),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.frame_len.is_power_of_two() || self.frame_len < 4 {
            return Err(Error::InvalidParameter(format!(
                "frame length must be a power of two >= 4, got {}",
                self.frame_len
            )));
        }
        if self.min_window < 3 || self.min_window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "minimum window must be odd and >= 3, got {}",
                self.min_window
            )));
        }
        if !(self.band_low >= 0.0 && self.band_low < self.band_high && self.band_high.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "band [{}, {}] is not a valid interval",
                self.band_low, self.band_high
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::InvalidParameter("overlap must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn validate_for_rate(&self, sample_rate: f64) -> Result<()> {
        self.validate()?;
        if self.band_high > sample_rate / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "band upper edge {} Hz exceeds Nyquist ({} Hz)",
                self.band_high,
                sample_rate / 2.0
            )));
        }
        Ok(())
    }

    fn frame_options(&self) -> FrameOptions {
        FrameOptions {
            frame_len: self.frame_len,
            window: self.window,
            overlap: self.overlap,
        }
    }
}

/// Bins of a half-spectrum kept by [`band_select`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandSelection {
    pub values: Vec<f64>,
    pub bin_frequencies: Vec<f64>,
    pub bin_indices: Vec<usize>,
}

/// Range of half-spectrum bins `m` with `band_low <= m * rate / frame_len <= band_high`.
fn band_range(
    half_len: usize,
    sample_rate: f64,
    band_low: f64,
    band_high: f64,
) -> Result<(usize, usize)> {
    let nyquist = sample_rate / 2.0;
    if !(band_low >= 0.0 && band_low <= band_high) {
        return Err(Error::InvalidParameter(format!(
            "band [{band_low}, {band_high}] is not a valid interval"
        )));
    }
    if band_high > nyquist {
        return Err(Error::InvalidParameter(format!(
            "band upper edge {band_high} Hz exceeds Nyquist ({nyquist} Hz)"
        )));
    }
    if half_len < 2 {
        return Err(Error::InvalidInput(
            "half-spectrum needs at least two bins".into(),
        ));
    }
    let frame_len = 2 * (half_len - 1);
    let freq = |m: usize| m as f64 * sample_rate / frame_len as f64;
    let first = (0..half_len).find(|&m| freq(m) >= band_low);
    let last = (0..half_len).rev().find(|&m| freq(m) <= band_high);
    match (first, last) {
        (Some(a), Some(b)) if a <= b => Ok((a, b)),
        _ => Err(Error::InvalidParameter(format!(
            "band [{band_low}, {band_high}] Hz contains no bins"
        ))),
    }
}

/// Keeps the bins of a half-spectrum (length `frame_len / 2 + 1`) whose
/// centre frequency lies in `[band_low, band_high]`, both ends inclusive.
pub fn band_select(
    values: &[f64],
    sample_rate: f64,
    band_low: f64,
    band_high: f64,
) -> Result<BandSelection> {
    let (a, b) = band_range(values.len(), sample_rate, band_low, band_high)?;
    let frame_len = 2 * (values.len() - 1);
    Ok(BandSelection {
        values: values[a..=b].to_vec(),
        bin_frequencies: (a..=b)
            .map(|m| m as f64 * sample_rate / frame_len as f64)
            .collect(),
        bin_indices: (a..=b).collect(),
    })
}

/// `out[i] = x[i] - min(x[i - w ..= i + w])` with `w = (window - 1) / 2`,
/// the window clamped at both ends.
pub fn local_min_subtract(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "window must be odd and >= 3, got {window}"
        )));
    }
    if window > values.len() {
        return Err(Error::InvalidParameter(format!(
            "window {window} is longer than the vector ({})",
            values.len()
        )));
    }
    let half = (window - 1) / 2;
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    // Indices of increasing values; the front is the current window minimum.
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while deque.back().is_some_and(|&j| values[j] >= values[next]) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while deque.front().is_some_and(|&j| j < lo) {
            deque.pop_front();
        }
        let min = values[*deque.front().expect("window is never empty")];
        out.push(values[i] - min);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    /// Baseline-subtracted log magnitudes, all `>= 0`.
    pub values: Vec<f64>,
    pub bin_frequencies: Vec<f64>,
    /// Positions of the kept bins in the full half-spectrum.
    pub bin_indices: Vec<usize>,
    /// In-band log spectrum before baseline removal, relative to its peak.
    /// Absent for fingerprints loaded from files.
    pub log_spectrum: Option<Vec<f64>>,
    pub source_rate: f64,
    pub config: FingerprintConfig,
}

impl Fingerprint {
    /// Rebuilds the bin bookkeeping for stored values.
    pub fn from_values(
        values: Vec<f64>,
        source_rate: f64,
        config: FingerprintConfig,
    ) -> Result<Self> {
        config.validate_for_rate(source_rate)?;
        let half = config.frame_len / 2 + 1;
        let (a, b) = band_range(half, source_rate, config.band_low, config.band_high)?;
        if values.len() != b - a + 1 {
            return Err(Error::IncompatibleFingerprint(format!(
                "{} values but the configuration selects {} bins",
                values.len(),
                b - a + 1
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "fingerprint value {v} is not finite and >= 0"
            )));
        }
        Ok(Self {
            values,
            bin_frequencies: (a..=b)
                .map(|m| m as f64 * source_rate / config.frame_len as f64)
                .collect(),
            bin_indices: (a..=b).collect(),
            log_spectrum: None,
            source_rate,
            config,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Peak positions (indices into `values`) using the default threshold.
    ///
    /// Measured on the in-band log spectrum when available, otherwise on the
    /// baseline-subtracted values.
    pub fn peaks(&self) -> Vec<usize> {
        let src = self.log_spectrum.as_deref().unwrap_or(&self.values);
        self.peaks_with(default_min_prominence(src))
    }

    pub fn peaks_with(&self, min_prominence: f64) -> Vec<usize> {
        let src = self.log_spectrum.as_deref().unwrap_or(&self.values);
        let mirror_low = self.bin_indices.first() == Some(&0);
        let mirror_high = self.bin_indices.last() == Some(&(self.config.frame_len / 2));
        let half = (self.config.min_window - 1) / 2;
        measure_peaks_mirrored(src, min_prominence, Some(half), mirror_low, mirror_high)
    }

    /// Peak positions as half-spectrum bin indices.
    pub fn peak_bins(&self) -> Vec<usize> {
        self.peaks()
            .into_iter()
            .map(|i| self.bin_indices[i])
            .collect()
    }

    /// Half-spectrum bins nearest to the in-band peaks predicted for `strides`.
    pub fn predicted_peak_bins(&self, strides: &[usize]) -> Result<Vec<usize>> {
        let prediction = predict_peaks(strides, Some(self.source_rate))?;
        let (lo, hi) = (
            self.bin_frequencies.first().copied().unwrap_or(0.0),
            self.bin_frequencies.last().copied().unwrap_or(0.0),
        );
        Ok(predicted_bins(
            &prediction,
            self.source_rate,
            self.config.frame_len,
            lo,
            hi,
        ))
    }
}

/// Averaged spectrum, log, local-minimum baseline, band restriction.
///
/// The averaged magnitudes are divided by their maximum before the log, so
/// the epsilon floor is relative and a gain applied to the audio cancels.
pub fn extract_fingerprint(audio: &Signal, config: &FingerprintConfig) -> Result<Fingerprint> {
    config.validate_for_rate(audio.sample_rate())?;
    let avg = average_frame_spectrum_with(audio, &config.frame_options())?;
    let peak = avg.iter().cloned().fold(0.0, f64::max);
    let rel: Vec<f64> = if peak > 0.0 {
        avg.iter().map(|v| v / peak).collect()
    } else {
        avg
    };
    let log = log_magnitude(&rel, config.epsilon)?;
    let flat = local_min_subtract(&log, config.min_window)?;
    let sel = band_select(
        &flat,
        audio.sample_rate(),
        config.band_low,
        config.band_high,
    )?;
    let (a, b) = (
        sel.bin_indices[0],
        *sel.bin_indices.last().expect("non-empty"),
    );
    Ok(Fingerprint {
        values: sel.values,
        bin_frequencies: sel.bin_frequencies,
        bin_indices: sel.bin_indices,
        log_spectrum: Some(log[a..=b].to_vec()),
        source_rate: audio.sample_rate(),
        config: *config,
    })
}

/// How well one stride schedule explains a fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchitectureMatch {
    pub strides: Vec<usize>,
    /// Overlap of predicted and measured peak sets (one-to-one, within
    /// [`BIN_TOLERANCE`]); zero when no peak is predicted in band.
    pub score: f64,
    /// Fraction of predicted peaks that were measured.
    pub recall: f64,
    /// Fraction of measured peaks that were predicted.
    pub precision: f64,
    pub predicted: usize,
    pub measured: usize,
}

/// Scores every candidate schedule against the fingerprint's measured peaks,
/// best first; ties keep the candidates' order.
pub fn match_architecture(
    fp: &Fingerprint,
    candidates: &[Vec<usize>],
) -> Result<Vec<ArchitectureMatch>> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate architectures".into()));
    }
    let measured = fp.peak_bins();
    let mut out = candidates
        .iter()
        .map(|strides| {
            let predicted = fp.predicted_peak_bins(strides)?;
            let matched = match_count(&predicted, &measured, BIN_TOLERANCE);
            let score = if predicted.is_empty() {
                0.0
            } else {
                jaccard_overlap(&predicted, &measured, BIN_TOLERANCE)
            };
            Ok(ArchitectureMatch {
                strides: strides.clone(),
                score,
                recall: peak_recall(&predicted, &measured, BIN_TOLERANCE),
                precision: if measured.is_empty() {
                    0.0
                } else {
                    matched as f64 / measured.len() as f64
                },
                predicted: predicted.len(),
                measured: measured.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(out)
}
