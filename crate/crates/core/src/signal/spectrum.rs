use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{Complex64, Signal};
use crate::{Error, Result};

/// Floor added before taking logs of magnitudes.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Taper applied to each frame before its transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Option<Vec<f64>> {
        match self {
            Window::Rectangular => None,
            Window::Hann => Some(
                (0..n)
                    .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOptions {
    pub frame_len: usize,
    pub window: Window,
    /// Fraction of a frame shared with the next one, in `[0, 1)`.
    pub overlap: f64,
}

impl FrameOptions {
    pub fn new(frame_len: usize) -> Self {
        Self {
            frame_len,
            window: Window::Rectangular,
            overlap: 0.0,
        }
    }

    fn hop(&self) -> usize {
        ((self.frame_len as f64 * (1.0 - self.overlap)).round() as usize).max(1)
    }
}

/// Mean magnitude half-spectrum over successive non-overlapping frames.
///
/// Returns `frame_len / 2 + 1` values; a trailing partial frame is dropped.
pub fn average_frame_spectrum(signal: &Signal, frame_len: usize) -> Result<Vec<f64>> {
    average_frame_spectrum_with(signal, &FrameOptions::new(frame_len))
}

pub fn average_frame_spectrum_with(signal: &Signal, opts: &FrameOptions) -> Result<Vec<f64>> {
    let n = opts.frame_len;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "frame length {n} is too short"
        )));
    }
    if !(0.0..1.0).contains(&opts.overlap) {
        return Err(Error::InvalidParameter(format!(
            "overlap must lie in [0, 1), got {}",
            opts.overlap
        )));
    }
    if signal.len() < n {
        return Err(Error::InsufficientData(format!(
            "signal has {} samples, one frame needs {n}",
            signal.len()
        )));
    }
    let hop = opts.hop();
    let frames = 1 + (signal.len() - n) / hop;
    let window = opts.window.coefficients(n);
    let fft = FftPlanner::new().plan_fft_forward(n);
    let half = n / 2 + 1;

    let mut acc = vec![0.0; half];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let x = signal.samples();
    for f in 0..frames {
        let frame = &x[f * hop..f * hop + n];
        match &window {
            Some(w) => buf
                .iter_mut()
                .zip(frame.iter().zip(w))
                .for_each(|(b, (&s, &wi))| *b = Complex64::new(s * wi, 0.0)),
            None => buf
                .iter_mut()
                .zip(frame)
                .for_each(|(b, &s)| *b = Complex64::new(s, 0.0)),
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        acc.iter_mut()
            .zip(&buf[..half])
            .for_each(|(a, c)| *a += c.norm());
    }
    let scale = 1.0 / frames as f64;
    acc.iter_mut().for_each(|a| *a *= scale);
    Ok(acc)
}

/// `ln(x + epsilon)` elementwise; entries must be non-negative.
pub fn log_magnitude(values: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    values
        .iter()
        .map(|&v| {
            if v >= 0.0 && v.is_finite() {
                Ok((v + epsilon).ln())
            } else {
                Err(Error::InvalidInput(format!(
                    "magnitude {v} is not a finite non-negative value"
                )))
            }
        })
        .collect()
}
