use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::Serialize;

use crate::{Error, Result};

/// Multiple of the noise scale a peak must clear by default.
const PROMINENCE_MULTIPLIER: f64 = 4.0;
/// Converts a median absolute deviation into a Gaussian standard deviation.
const MAD_TO_SIGMA: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayerPeakCount {
    pub layer: usize,
    pub p_max: usize,
}

/// Artifact peaks implied by a stride schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakPrediction {
    pub strides: Vec<usize>,
    pub total_stride: u64,
    pub peak_count: usize,
    /// `n` such that peak `n` sits at `n / total_stride` cycles per sample.
    pub harmonics: Vec<u64>,
    /// Cycles per output sample, ascending, within `[0, 0.5]`.
    pub normalized_frequencies: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absolute_frequencies: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_hz: Option<f64>,
    pub per_layer_counts: Vec<LayerPeakCount>,
}

/// Predicts the peak comb of a stack from its strides.
///
/// The set is built by the recursion the layers perform: each stride `k`
/// clones the current half-spectrum `k` times, so a lone DC peak ends up
/// copied to every multiple of the input rate. Frequencies are kept as exact
/// fractions so peaks reached through different layers coincide exactly.
pub fn predict_peaks(strides: &[usize], output_rate: Option<f64>) -> Result<PeakPrediction> {
    if strides.is_empty() {
        return Err(Error::InvalidParameter("stride list is empty".into()));
    }
    if let Some(&bad) = strides.iter().find(|&&k| k == 0) {
        return Err(Error::InvalidParameter(format!(
            "stride must be >= 1, got {bad}"
        )));
    }
    if let Some(rate) = output_rate {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "output rate must be positive, got {rate}"
            )));
        }
    }
    let total: u64 = strides
        .iter()
        .try_fold(1u64, |acc, &k| acc.checked_mul(k as u64))
        .ok_or_else(|| Error::InvalidParameter("stride product overflows".into()))?;

    let half = Ratio::new(1u64, 2);
    let mut set: BTreeSet<Ratio<u64>> = BTreeSet::from([Ratio::from_integer(0)]);
    for &k in strides {
        let k = k as u64;
        // Unfold to one full period [0, 1), then clone k times and fold back.
        let full: BTreeSet<Ratio<u64>> = set
            .iter()
            .flat_map(|&f| [f, Ratio::from_integer(1) - f])
            .filter(|f| *f < Ratio::from_integer(1))
            .collect();
        set = full
            .iter()
            .flat_map(|&f| {
                (0..k).map(move |m| (f + Ratio::from_integer(m)) / Ratio::from_integer(k))
            })
            .map(|g| {
                if g > half {
                    Ratio::from_integer(1) - g
                } else {
                    g
                }
            })
            .collect();
    }

    let harmonics: Vec<u64> = set
        .iter()
        .map(|r| (*r * Ratio::from_integer(total)).to_integer())
        .collect();
    let normalized_frequencies: Vec<f64> =
        harmonics.iter().map(|&n| n as f64 / total as f64).collect();
    let absolute_frequencies = output_rate.map(|rate| {
        harmonics
            .iter()
            .map(|&n| n as f64 * rate / total as f64)
            .collect()
    });
    Ok(PeakPrediction {
        strides: strides.to_vec(),
        total_stride: total,
        peak_count: harmonics.len(),
        harmonics,
        normalized_frequencies,
        output_rate,
        absolute_frequencies,
        spacing_hz: output_rate.map(|rate| rate / total as f64),
        per_layer_counts: strides
            .iter()
            .enumerate()
            .map(|(layer, &k)| LayerPeakCount {
                layer,
                p_max: k / 2,
            })
            .collect(),
    })
}

/// Bins of a `frame_len`-point transform nearest to each predicted peak that
/// falls inside `[band_low, band_high]` Hz, ascending and deduplicated.
pub fn predicted_bins(
    prediction: &PeakPrediction,
    output_rate: f64,
    frame_len: usize,
    band_low: f64,
    band_high: f64,
) -> Vec<usize> {
    let mut bins: Vec<usize> = prediction
        .normalized_frequencies
        .iter()
        .map(|f| f * output_rate)
        .filter(|hz| *hz >= band_low && *hz <= band_high)
        .map(|hz| (hz * frame_len as f64 / output_rate).round() as usize)
        .collect();
    bins.dedup();
    bins
}

/// Indices of interior local maxima standing more than `min_prominence`
/// above the higher of the two local minima that bracket them.
///
/// Walking away from a maximum, the bracketing minimum on each side is where
/// the values stop decreasing. The first and last entries are never peaks;
/// see [`measure_peaks_mirrored`] for half-spectra whose ends are axes of
/// symmetry.
pub fn measure_peaks(values: &[f64], min_prominence: f64) -> Vec<usize> {
    measure_peaks_windowed(values, min_prominence, None)
}

/// [`measure_peaks`] with the walk to each bracketing minimum limited to
/// `half_window` entries, so only narrow peaks count. Broad bumps of a
/// smooth spectrum rise little within a few bins.
pub fn measure_peaks_windowed(
    values: &[f64],
    min_prominence: f64,
    half_window: Option<usize>,
) -> Vec<usize> {
    let n = values.len();
    let reach = half_window.unwrap_or(n);
    let mut peaks = Vec::new();
    if n < 3 {
        return peaks;
    }
    for i in 1..n - 1 {
        let v = values[i];
        if !(v > values[i - 1] && v >= values[i + 1]) {
            continue;
        }
        let stop = i.saturating_sub(reach);
        let mut j = i;
        while j > stop && values[j - 1] <= values[j] {
            j -= 1;
        }
        let left = values[j];
        let stop = (i + reach).min(n - 1);
        let mut j = i;
        while j < stop && values[j + 1] <= values[j] {
            j += 1;
        }
        let right = values[j];
        if v - left.max(right) > min_prominence {
            peaks.push(i);
        }
    }
    peaks
}

/// [`measure_peaks_windowed`] after reflecting the vector about its first
/// entry (`mirror_low`) and/or its last entry (`mirror_high`).
///
/// The magnitude spectrum of a real signal is symmetric about DC and about
/// Nyquist, so a half-spectrum reaching either end should be reflected there
/// for a peak at 0 Hz or at Nyquist to be seen.
pub fn measure_peaks_mirrored(
    values: &[f64],
    min_prominence: f64,
    half_window: Option<usize>,
    mirror_low: bool,
    mirror_high: bool,
) -> Vec<usize> {
    let n = values.len();
    if n < 2 {
        return Vec::new();
    }
    let mut ext = Vec::with_capacity(3 * n);
    let lead = if mirror_low { n - 1 } else { 0 };
    if mirror_low {
        ext.extend(values[1..].iter().rev());
    }
    ext.extend_from_slice(values);
    if mirror_high {
        ext.extend(values[..n - 1].iter().rev());
    }
    measure_peaks_windowed(&ext, min_prominence, half_window)
        .into_iter()
        .filter(|&i| i >= lead && i < lead + n)
        .map(|i| i - lead)
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Noise-scaled prominence threshold for a log spectrum.
///
/// The scale is the median absolute deviation of bin-to-bin differences,
/// converted to a standard deviation. Peaks occupy few bins, so the median
/// tracks the noise between them; the estimate is unchanged by adding a
/// constant to the spectrum (i.e. by the input gain).
pub fn default_min_prominence(log_spectrum: &[f64]) -> f64 {
    if log_spectrum.len() < 3 {
        return 0.0;
    }
    let diffs: Vec<f64> = log_spectrum.windows(2).map(|w| w[1] - w[0]).collect();
    let med = median(diffs.clone());
    let mad = median(diffs.iter().map(|d| (d - med).abs()).collect());
    PROMINENCE_MULTIPLIER * MAD_TO_SIGMA * mad
}

/// Size of a one-to-one matching between two ascending index lists where
/// paired entries differ by at most `tolerance`.
pub fn match_count(a: &[usize], b: &[usize], tolerance: usize) -> usize {
    let (mut i, mut j, mut matched) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        if a[i].abs_diff(b[j]) <= tolerance {
            matched += 1;
            i += 1;
            j += 1;
        } else if a[i] < b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    matched
}

/// Matched pairs over the union size; 1 when both lists are empty.
pub fn jaccard_overlap(a: &[usize], b: &[usize], tolerance: usize) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let m = match_count(a, b, tolerance);
    m as f64 / (a.len() + b.len() - m) as f64
}

/// Fraction of `predicted` with some entry of `measured` within `tolerance`.
/// Zero when nothing is predicted.
pub fn peak_recall(predicted: &[usize], measured: &[usize], tolerance: usize) -> f64 {
    if predicted.is_empty() {
        return 0.0;
    }
    let hits = predicted
        .iter()
        .filter(|&&p| measured.iter().any(|&q| p.abs_diff(q) <= tolerance))
        .count();
    hits as f64 / predicted.len() as f64
}
