//! Spectral peak artifacts of strided deconvolution.
//!
//! Zero-insert upsampling periodizes a spectrum, so every stride in a
//! deconvolution stack clones the DC component of its input into a comb of
//! peaks. The crate predicts where those peaks land from the stride schedule
//! alone, simulates stacks to check the prediction, extracts artifact
//! fingerprints from audio and trains a logistic-regression detector on them.
//!
//! Module map:
//!
//! * [`signal`]: DFT, convolution, upsampling, frame-averaged spectra.
//! * [`deconv`]: deconvolution layers and stacks, interchangeable engines
//!   behind [`deconv::DeconvEngine`], peak prediction and measurement.
//! * [`fingerprint`]: baseline-subtracted band-limited log spectra.
//! * [`detector`]: linear model training, inference and evaluation.
//! * [`audio`]: WAV I/O, resampling and the synthetic dataset generator.
//! * [`presets`]: named stride schedules.

pub mod audio;
pub mod deconv;
pub mod detector;
mod error;
pub mod fingerprint;
pub mod presets;
pub mod registry;
pub mod signal;

pub use error::{Error, Result};

/// Label of genuine audio; every other label counts as synthetic.
pub const REAL_LABEL: &str = "real";
