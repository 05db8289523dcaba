//! Kaiser-windowed sinc resampling.
//!
//! With [`ZERO_CROSSINGS`] = 32 and [`KAISER_BETA`] = 8.6 the stopband sits
//! near -85 dB and the transition band spans about 0.05 of the input rate
//! divided by the decimation factor. The cutoff is [`ROLLOFF`] times the lower
//! Nyquist frequency, so everything above the new Nyquist is in the stopband.

use crate::signal::Signal;
use crate::{Error, Result};

pub const ZERO_CROSSINGS: usize = 32;
pub const KAISER_BETA: f64 = 8.6;
/// Cutoff as a fraction of the lower of the two Nyquist frequencies.
pub const ROLLOFF: f64 = 0.9;

/// Above this many phases the filter is evaluated per sample instead of tabulated.
const MAX_PHASES: u64 = 4096;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

struct Filter {
    /// Cutoff in cycles per input sample.
    cutoff: f64,
    half_width: f64,
    norm: f64,
}

impl Filter {
    fn new(source: f64, target: f64) -> Self {
        let cutoff = ROLLOFF * 0.5 * source.min(target) / source;
        Self {
            cutoff,
            half_width: ZERO_CROSSINGS as f64 / (2.0 * cutoff),
            norm: bessel_i0(KAISER_BETA),
        }
    }

    /// Impulse response at `t` input samples from the centre.
    fn at(&self, t: f64) -> f64 {
        let r = t / self.half_width;
        if r.abs() >= 1.0 {
            return 0.0;
        }
        let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / self.norm;
        let arg = 2.0 * self.cutoff * t;
        let sinc = if arg == 0.0 {
            1.0
        } else {
            (std::f64::consts::PI * arg).sin() / (std::f64::consts::PI * arg)
        };
        2.0 * self.cutoff * sinc * window
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Resamples to `target_rate`; the output has `round(len * target / source)`
/// samples and output sample `n` sits at input time `n * source / target`.
/// Samples outside the input are treated as zero. Equal rates return an
/// exact copy.
pub fn resample(signal: &Signal, target_rate: f64) -> Result<Signal> {
    if !(target_rate.is_finite() && target_rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target rate must be positive, got {target_rate}"
        )));
    }
    let source_rate = signal.sample_rate();
    if target_rate == source_rate {
        return Ok(signal.clone());
    }
    let x = signal.samples();
    let out_len = ((x.len() as f64) * target_rate / source_rate).round() as usize;
    if out_len == 0 {
        return Err(Error::InsufficientData(format!(
            "{} samples at {source_rate} Hz leave nothing at {target_rate} Hz",
            x.len()
        )));
    }
    let filter = Filter::new(source_rate, target_rate);
    let reach = filter.half_width.ceil() as i64;
    let len = x.len() as i64;

    let dot = |base: i64, taps: &mut dyn FnMut(i64) -> f64| -> f64 {
        let lo = (base - reach + 1).max(0);
        let hi = (base + reach).min(len - 1);
        let mut acc = 0.0;
        for j in lo..=hi {
            acc += x[j as usize] * taps(j);
        }
        acc
    };

    let integral = source_rate.fract() == 0.0 && target_rate.fract() == 0.0;
    let ratio = if integral {
        let (s, t) = (source_rate as u64, target_rate as u64);
        let g = gcd(s, t);
        Some((t / g, s / g))
    } else {
        None
    };

    let samples: Vec<f64> = match ratio {
        // Output n sits at (n * m) / l input samples; the fractional part
        // takes one of l values, so the taps repeat with period l.
        Some((l, m)) if l <= MAX_PHASES => {
            let width = 2 * reach as usize;
            let table: Vec<Vec<f64>> = (0..l)
                .map(|p| {
                    let frac = p as f64 / l as f64;
                    (0..width)
                        .map(|k| filter.at(frac + (reach - 1 - k as i64) as f64))
                        .collect()
                })
                .collect();
            (0..out_len as u64)
                .map(|n| {
                    let pos = n * m;
                    let base = (pos / l) as i64;
                    let taps = &table[(pos % l) as usize];
                    dot(base, &mut |j| taps[(j - base + reach - 1) as usize])
                })
                .collect()
        }
        _ => {
            let step = source_rate / target_rate;
            (0..out_len)
                .map(|n| {
                    let tau = n as f64 * step;
                    let base = tau.floor() as i64;
                    dot(base, &mut |j| filter.at(tau - j as f64))
                })
                .collect()
        }
    };
    Signal::new(samples, target_rate)
}
