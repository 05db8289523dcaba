use rustfft::FftPlanner;

use super::{Complex64, Signal, Spectrum};
use crate::Result;

/// Forward DFT, `X[m] = sum_n x[n] e^{-2 pi i m n / N}`, for any length.
pub fn dft(signal: &Signal) -> Spectrum {
    let mut buf: Vec<Complex64> = signal
        .samples()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let n = buf.len();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Spectrum {
        bins: buf,
        bin_resolution: signal.sample_rate() / n as f64,
    }
}

/// Inverse DFT returning the real part.
///
/// Imaginary residue is dropped; it is at rounding level whenever the
/// spectrum is conjugate symmetric.
pub fn idft(spectrum: &Spectrum) -> Result<Signal> {
    let mut buf = spectrum.bins().to_vec();
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Signal::new(
        buf.iter().map(|c| c.re * scale).collect(),
        spectrum.sample_rate(),
    )
}

/// Complex inverse used by tests that need the imaginary part.
#[cfg(test)]
fn idft_complex(bins: &[Complex64]) -> Vec<Complex64> {
    let mut buf = bins.to_vec();
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}
