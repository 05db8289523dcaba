use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::signal::Signal;
use crate::{Error, Result};

const I16_SCALE: f64 = 32768.0;
const I24_SCALE: f64 = 8_388_608.0;

fn corrupt(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::CorruptFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

fn sample_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::Unsupported => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "unsupported WAV encoding".into(),
        },
        other => corrupt(path, other),
    }
}

/// Reads a 16/24-bit PCM or 32-bit float WAV file.
///
/// Integer samples are divided by 2^(bits-1), so 16-bit `-32768` reads as
/// `-1.0`. Multi-channel files are downmixed by averaging the channels.
pub fn read_wav(path: &Path) -> Result<Signal> {
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::io(path, io)
        }
        hound::Error::IoError(io) => corrupt(path, io),
        hound::Error::Unsupported => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "unsupported WAV encoding".into(),
        },
        other => corrupt(path, other),
    })?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(corrupt(path, "zero channels"));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / I16_SCALE))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| sample_error(path, e))?,
        (SampleFormat::Int, 24) => reader
            .into_samples::<i32>()
            .map(|s| s.map(|v| v as f64 / I24_SCALE))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| sample_error(path, e))?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| sample_error(path, e))?,
        (fmt, bits) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("{bits}-bit {fmt:?} samples"),
            })
        }
    };
    if !interleaved.len().is_multiple_of(channels) {
        return Err(corrupt(
            path,
            "sample count is not a multiple of the channel count",
        ));
    }
    if interleaved.is_empty() {
        return Err(corrupt(path, "no samples"));
    }
    let frames = interleaved.len() / channels;
    let per_channel: Vec<Vec<f64>> = (0..channels)
        .map(|c| (0..frames).map(|i| interleaved[i * channels + c]).collect())
        .collect();
    Signal::from_channels(&per_channel, spec.sample_rate as f64)
}

fn to_i16(x: f64) -> i16 {
    (x * I16_SCALE).round().clamp(-I16_SCALE, I16_SCALE - 1.0) as i16
}

/// The values [`write_wav`] followed by [`read_wav`] would produce.
pub fn quantize_pcm16(signal: &Signal) -> Signal {
    let samples = signal
        .samples()
        .iter()
        .map(|&x| to_i16(x) as f64 / I16_SCALE)
        .collect();
    Signal::new(samples, signal.sample_rate()).expect("quantized samples are finite")
}

/// Writes a mono 16-bit PCM file; samples outside [-1, 1) are clamped.
pub fn write_wav(path: &Path, signal: &Signal) -> Result<()> {
    let rate = signal.sample_rate();
    if rate.fract() != 0.0 || rate > u32::MAX as f64 {
        return Err(Error::InvalidParameter(format!(
            "WAV needs an integer sample rate, got {rate}"
        )));
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let wrap = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => corrupt(path, other),
    };
    let mut writer = WavWriter::create(path, spec).map_err(wrap)?;
    for &x in signal.samples() {
        writer.write_sample(to_i16(x)).map_err(wrap)?;
    }
    writer.finalize().map_err(wrap)
}
