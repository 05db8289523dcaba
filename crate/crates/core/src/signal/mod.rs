//! Discrete signals, kernels and spectra, plus the primitives the rest of
//! the crate is built from.

mod dft;
mod ops;
mod spectrum;

pub use dft::{dft, idft};
pub use ops::{
    convolve, linear_interp_upsample, triangular_kernel, zero_insert_upsample, ConvMode,
};
pub use spectrum::{
    average_frame_spectrum, average_frame_spectrum_with, log_magnitude, FrameOptions, Window,
    DEFAULT_EPSILON,
};

pub use rustfft::num_complex::Complex64;

use crate::{Error, Result};

/// Real-valued waveform with its sampling rate in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput(
                "signal must have at least one sample".into(),
            ));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Mean downmix of equally long channels.
    pub fn from_channels(channels: &[Vec<f64>], sample_rate: f64) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::InvalidInput("no channels".into()))?;
        if channels.iter().any(|c| c.len() != first.len()) {
            return Err(Error::InvalidInput("channels differ in length".into()));
        }
        let scale = 1.0 / channels.len() as f64;
        let samples = (0..first.len())
            .map(|i| channels.iter().map(|c| c[i]).sum::<f64>() * scale)
            .collect();
        Self::new(samples, sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|x| x * gain).collect(),
            self.sample_rate,
        )
    }

    /// Same samples, new rate.
    pub fn with_rate(self, sample_rate: f64) -> Result<Self> {
        Self::new(self.samples, sample_rate)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }
}

/// Short real filter, e.g. a learned deconvolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    taps: Vec<f64>,
}

impl Kernel {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidInput(
                "kernel must have at least one tap".into(),
            ));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("kernel taps must be finite".into()));
        }
        Ok(Self { taps })
    }

    pub fn identity() -> Self {
        Self { taps: vec![1.0] }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Complex DFT bins of a length-`N` transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    bin_resolution: f64,
}

impl Spectrum {
    /// `bin_resolution` is the spacing between bins in Hz (`rate / N`).
    pub fn new(bins: Vec<Complex64>, bin_resolution: f64) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::InvalidInput(
                "spectrum must have at least one bin".into(),
            ));
        }
        if !(bin_resolution.is_finite() && bin_resolution > 0.0) {
            return Err(Error::InvalidInput(format!(
                "bin resolution must be positive, got {bin_resolution}"
            )));
        }
        Ok(Self {
            bins,
            bin_resolution,
        })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn bin_resolution(&self) -> f64 {
        self.bin_resolution
    }

    /// Length of the transform that produced the bins.
    pub fn origin_length(&self) -> usize {
        self.bins.len()
    }

    /// Sample rate of the time-domain signal.
    pub fn sample_rate(&self) -> f64 {
        self.bin_resolution * self.bins.len() as f64
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|c| c.norm()).collect()
    }

    /// Largest deviation from `bins[m] = conj(bins[N - m])`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.bins.len();
        (1..n)
            .map(|m| (self.bins[m] - self.bins[n - m].conj()).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_rejects_bad_input() {
        assert!(Signal::new(vec![], 1.0).is_err());
        assert!(Signal::new(vec![1.0], 0.0).is_err());
        assert!(Signal::new(vec![1.0], f64::NAN).is_err());
        assert!(Signal::new(vec![1.0, f64::INFINITY], 1.0).is_err());
        assert!(Kernel::new(vec![]).is_err());
    }

    #[test]
    fn downmix_of_opposite_channels_is_silent() {
        let x = vec![0.1, -0.4, 0.9];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let s = Signal::from_channels(&[x, neg], 8000.0).unwrap();
        assert!(s.samples().iter().all(|&v| v == 0.0));
    }
}
