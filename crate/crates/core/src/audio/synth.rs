//! Desk-scale dataset: "real" clips from a seeded source and synthetic clips
//! made by pushing the downsampled source through random deconvolution stacks.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_wav, resample, write_manifest, write_wav, ManifestEntry};
use crate::deconv::{run_stack, Activation, DeconvStack, DirectEngine};
use crate::signal::{dft, idft, Complex64, Signal, Spectrum};
use crate::{Error, Result, REAL_LABEL};

/// Every generated clip is scaled to this peak amplitude before writing.
pub const OUTPUT_PEAK: f64 = 0.5;

/// Where the "real" class comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealSource {
    Noise,
    HarmonicMixture,
    /// WAV files in this directory, used in sorted order and cycled.
    FileDir(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthStack {
    pub tag: String,
    pub strides: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_per_class: usize,
    pub duration_s: f64,
    pub real_source: RealSource,
    pub stacks: Vec<SynthStack>,
    #[serde(default = "default_rate")]
    pub output_rate: f64,
    #[serde(default)]
    pub seed: u64,
    /// Added to the standardized latent before the stack.
    #[serde(default = "default_offset")]
    pub latent_offset: f64,
    #[serde(default = "default_activation")]
    pub activation: String,
}

fn default_rate() -> f64 {
    48000.0
}

fn default_offset() -> f64 {
    1.0
}

fn default_activation() -> String {
    "leaky_relu".into()
}

fn entry_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 {
            return Err(Error::InvalidParameter(
                "n_per_class must be at least 1".into(),
            ));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::InvalidParameter("duration must be positive".into()));
        }
        if !(self.output_rate.is_finite()
            && self.output_rate > 0.0
            && self.output_rate.fract() == 0.0)
        {
            return Err(Error::InvalidParameter(
                "output rate must be a positive integer".into(),
            ));
        }
        Activation::parse(&self.activation)?;
        let mut tags = std::collections::BTreeSet::new();
        for s in &self.stacks {
            if s.tag.is_empty() || s.tag == REAL_LABEL || !tags.insert(s.tag.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "stack tag {:?} is empty, reserved or repeated",
                    s.tag
                )));
            }
            if s.tag.contains(['/', '\\']) {
                return Err(Error::InvalidParameter(format!(
                    "stack tag {:?} contains a path separator",
                    s.tag
                )));
            }
            if s.strides.is_empty() || s.strides.contains(&0) {
                return Err(Error::InvalidParameter(format!(
                    "stack {:?} has invalid strides",
                    s.tag
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: Self =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        spec.validate()?;
        Ok(spec)
    }

    fn clip_len(&self) -> usize {
        (self.duration_s * self.output_rate).round().max(1.0) as usize
    }

    /// Source clip `index` at the output rate, before peak normalization.
    pub fn source(&self, index: usize) -> Result<Signal> {
        let n = self.clip_len();
        let mut rng = entry_rng(self.seed, index);
        match &self.real_source {
            RealSource::Noise => {
                let x = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                Signal::new(x, self.output_rate)
            }
            RealSource::HarmonicMixture => harmonic_mixture(n, self.output_rate, &mut rng),
            RealSource::FileDir(dir) => {
                let files = wav_files(dir)?;
                let s = resample(&read_wav(&files[index % files.len()])?, self.output_rate)?;
                let x = s.samples();
                Signal::new((0..n).map(|i| x[i % x.len()]).collect(), self.output_rate)
            }
        }
    }

    /// Real clip `index` as written to disk, before quantization.
    pub fn real_clip(&self, index: usize) -> Result<Signal> {
        normalize_peak(&self.source(index)?, OUTPUT_PEAK)
    }

    /// Synthetic clip `index` of stack `stack`, before quantization.
    ///
    /// The source is downsampled by the stack's total stride, standardized,
    /// offset by `latent_offset` and fed through a stack whose weights are
    /// drawn from the stack seed and the clip index. The circular output is
    /// wrapped to the clip length.
    pub fn synthetic_clip(&self, stack: usize, index: usize) -> Result<Signal> {
        let st = self
            .stacks
            .get(stack)
            .ok_or_else(|| Error::InvalidParameter(format!("no stack number {stack}")))?;
        let total: usize = st.strides.iter().product();
        let latent_rate = self.output_rate / total as f64;
        let src = self.source(index)?;
        let latent = resample(&src, latent_rate)?;
        let mean = latent.mean();
        let sd = (latent
            .samples()
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / latent.len() as f64)
            .sqrt();
        let sd = if sd > 0.0 { sd } else { 1.0 };
        let z = latent
            .samples()
            .iter()
            .map(|v| (v - mean) / sd + self.latent_offset)
            .collect();
        let latent = Signal::new(z, latent_rate)?;
        let weights_seed = entry_rng(st.seed, index).random::<u64>();
        let deconv = DeconvStack::random(
            &st.strides,
            Activation::parse(&self.activation)?,
            latent_rate,
            weights_seed,
        )?;
        let out = run_stack(&latent, &deconv, &DirectEngine, false)?.output;
        let y = out.samples();
        let wrapped = (0..src.len()).map(|i| y[i % y.len()]).collect();
        normalize_peak(&Signal::new(wrapped, self.output_rate)?, OUTPUT_PEAK)
    }
}

fn wav_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no WAV files in {}",
            dir.display()
        )));
    }
    Ok(files)
}

/// Scales `signal` so its largest absolute sample equals `peak`; silence is
/// returned unchanged.
pub fn normalize_peak(signal: &Signal, peak: f64) -> Result<Signal> {
    let max = signal.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(signal.clone());
    }
    signal.scaled(peak / max)
}

/// Pink (1/f power) noise with unit RMS, shaped in the frequency domain.
pub fn pink_noise(len: usize, sample_rate: f64, rng: &mut impl Rng) -> Result<Signal> {
    let white: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
    let spec = dft(&Signal::new(white, sample_rate)?);
    let bins: Vec<Complex64> = spec
        .bins()
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let f = m.min(len - m);
            if f == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                c / (f as f64).sqrt()
            }
        })
        .collect();
    let shaped = idft(&Spectrum::new(bins, spec.bin_resolution())?)?;
    let rms = (shaped.energy() / len as f64).sqrt();
    if rms > 0.0 {
        shaped.scaled(1.0 / rms)
    } else {
        Ok(shaped)
    }
}

/// 5 to 15 sinusoids at log-uniform frequencies in [50 Hz, 10 kHz] with
/// amplitudes falling as `f^-1/2`, normalized to unit RMS, plus pink noise
/// 20 dB below.
pub fn harmonic_mixture(len: usize, sample_rate: f64, rng: &mut impl Rng) -> Result<Signal> {
    let count = rng.random_range(5..=15);
    let f_hi = 10_000.0f64.min(0.45 * sample_rate);
    let (lo, hi) = (50.0f64.ln(), f_hi.ln());
    let mut x = vec![0.0; len];
    for _ in 0..count {
        let f = rng.random_range(lo..hi).exp();
        let amp = (100.0 / f).sqrt() * rng.random_range(0.5..1.0);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let w = std::f64::consts::TAU * f / sample_rate;
        for (i, v) in x.iter_mut().enumerate() {
            *v += amp * (w * i as f64 + phase).sin();
        }
    }
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
    let pink = pink_noise(len, sample_rate, rng)?;
    let y = x
        .iter()
        .zip(pink.samples())
        .map(|(a, p)| a / rms + 0.1 * p)
        .collect();
    Signal::new(y, sample_rate)
}

/// Writes `real/real_NNNN.wav` and `<tag>/<tag>_NNNN.wav` clips as 16-bit PCM
/// plus `manifest.jsonl` under `out_dir`, returning the manifest entries.
/// Output is identical for any thread count.
pub fn generate_synth_dataset(spec: &SynthSpec, out_dir: &Path) -> Result<Vec<ManifestEntry>> {
    spec.validate()?;
    let labels: Vec<&str> = std::iter::once(REAL_LABEL)
        .chain(spec.stacks.iter().map(|s| s.tag.as_str()))
        .collect();
    for l in &labels {
        let d = out_dir.join(l);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(d, e))?;
    }
    let jobs: Vec<(usize, usize)> = (0..labels.len())
        .flat_map(|c| (0..spec.n_per_class).map(move |i| (c, i)))
        .collect();
    let entries = jobs
        .par_iter()
        .map(|&(class, index)| {
            let clip = if class == 0 {
                spec.real_clip(index)?
            } else {
                spec.synthetic_clip(class - 1, index)?
            };
            let rel =
                PathBuf::from(labels[class]).join(format!("{}_{index:04}.wav", labels[class]));
            write_wav(&out_dir.join(&rel), &clip)?;
            Ok(ManifestEntry {
                path: rel,
                label: labels[class].to_string(),
                sample_rate: spec.output_rate,
                duration_s: clip.duration(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_manifest(&out_dir.join("manifest.jsonl"), &entries)?;
    Ok(entries)
}
