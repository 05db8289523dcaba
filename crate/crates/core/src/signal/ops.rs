use super::{Kernel, Signal};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvMode {
    /// Length `N + K - 1`.
    Full,
    /// Length `N`, centred crop of the full convolution.
    Same,
    /// Length `N`, indices wrap modulo `N`.
    #[default]
    Circular,
}

fn check_stride(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "upsampling factor must be >= 1".into(),
        ));
    }
    Ok(())
}

/// Inserts `k - 1` zeros after every sample; the output rate is `k` times
/// the input rate.
pub fn zero_insert_upsample(signal: &Signal, k: usize) -> Result<Signal> {
    check_stride(k)?;
    let mut out = vec![0.0; signal.len() * k];
    for (i, &x) in signal.samples().iter().enumerate() {
        out[i * k] = x;
    }
    Signal::new(out, signal.sample_rate() * k as f64)
}

/// Triangle of `2k - 1` taps peaking at 1: `1 - |t - (k - 1)| / k`.
pub fn triangular_kernel(k: usize) -> Result<Kernel> {
    check_stride(k)?;
    let centre = (k - 1) as f64;
    Kernel::new(
        (0..2 * k - 1)
            .map(|t| 1.0 - (t as f64 - centre).abs() / k as f64)
            .collect(),
    )
}

/// Linear interpolation by `k` with circular extension at the edges.
///
/// Computed as the zero-inserted signal circularly convolved with
/// [`triangular_kernel`], re-centred so that `out[k * i] = in[i]`.
pub fn linear_interp_upsample(signal: &Signal, k: usize) -> Result<Signal> {
    check_stride(k)?;
    if k == 1 {
        return Ok(signal.clone());
    }
    let zeros = zero_insert_upsample(signal, k)?;
    let conv = convolve(&zeros, &triangular_kernel(k)?, ConvMode::Circular)?;
    let m = conv.len();
    let c = conv.samples();
    let out = (0..m).map(|j| c[(j + k - 1) % m]).collect();
    Signal::new(out, zeros.sample_rate())
}

/// Discrete convolution `(s * h)[j] = sum_t s[j - t] h[t]`.
pub fn convolve(signal: &Signal, kernel: &Kernel, mode: ConvMode) -> Result<Signal> {
    let s = signal.samples();
    let h = kernel.taps();
    let n = s.len();
    let out = match mode {
        ConvMode::Circular => {
            let mut out = vec![0.0; n];
            for (t, &ht) in h.iter().enumerate() {
                let shift = t % n;
                for (j, o) in out.iter_mut().enumerate() {
                    *o += ht * s[(j + n - shift) % n];
                }
            }
            out
        }
        ConvMode::Full | ConvMode::Same => {
            let mut full = vec![0.0; n + h.len() - 1];
            for (i, &si) in s.iter().enumerate() {
                for (t, &ht) in h.iter().enumerate() {
                    full[i + t] += si * ht;
                }
            }
            if mode == ConvMode::Full {
                full
            } else {
                let start = (h.len() - 1) / 2;
                full[start..start + n].to_vec()
            }
        }
    };
    Signal::new(out, signal.sample_rate())
}
