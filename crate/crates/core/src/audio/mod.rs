//! Audio ingestion and the synthetic dataset generator.

mod manifest;
mod resample;
mod synth;
mod wav;

pub use manifest::{read_manifest, write_manifest, ManifestEntry};
pub use resample::{resample, KAISER_BETA, ROLLOFF, ZERO_CROSSINGS};
pub use synth::{
    generate_synth_dataset, harmonic_mixture, normalize_peak, pink_noise, RealSource, SynthSpec,
    SynthStack, OUTPUT_PEAK,
};
pub use wav::{quantize_pcm16, read_wav, write_wav};
