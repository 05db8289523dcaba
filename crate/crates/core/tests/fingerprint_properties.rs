use peakprint::audio::{harmonic_mixture, resample};
use peakprint::deconv::{noise_latent, run_stack, Activation, DeconvStack, DirectEngine};
use peakprint::fingerprint::{
    extract_fingerprint, local_min_subtract, match_architecture, FingerprintConfig,
};
use peakprint::signal::Signal;
use peakprint::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mixture(seed: u64, seconds: f64) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    harmonic_mixture((48000.0 * seconds) as usize, 48000.0, &mut rng).unwrap()
}

fn encodec_like(seed: u64, frames: usize) -> Signal {
    let rate = 48000.0 / 320.0;
    let latent = noise_latent((frames * 8192usize).div_ceil(320), rate, 1.0, seed).unwrap();
    let stack = DeconvStack::random(&[8, 5, 4, 2], Activation::default(), rate, seed + 1).unwrap();
    run_stack(&latent, &stack, &DirectEngine, false)
        .unwrap()
        .output
}

proptest! {
    #[test]
    fn baseline_ignores_offsets(x in prop::collection::vec(-5.0f64..5.0, 11..200), c in -50.0f64..50.0) {
        let a = local_min_subtract(&x, 11).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let b = local_min_subtract(&shifted, 11).unwrap();
        for (p, q) in a.iter().zip(&b) {
            // Adding c rounds each entry once; differences stay at that level.
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + c.abs() + p.abs()) * 8.0);
            prop_assert!(*q >= 0.0);
        }
    }
}

#[test]
fn values_are_non_negative_and_bins_in_band() {
    let cfg = FingerprintConfig::default();
    let fp = extract_fingerprint(&mixture(1, 3.0), &cfg).unwrap();
    assert!(fp.values.iter().all(|&v| v >= 0.0));
    assert!(fp.bin_frequencies.windows(2).all(|w| w[0] < w[1]));
    assert!(fp.bin_frequencies[0] >= 5000.0 && *fp.bin_frequencies.last().unwrap() <= 16000.0);
    assert_eq!(fp.values.len(), 1877);
}

#[test]
fn gain_does_not_change_the_fingerprint() {
    let cfg = FingerprintConfig::default();
    let audio = mixture(2, 2.0);
    let base = extract_fingerprint(&audio, &cfg).unwrap();
    for g in [0.01, 0.1, 1.0, 10.0] {
        let fp = extract_fingerprint(&audio.scaled(g).unwrap(), &cfg).unwrap();
        for (a, b) in base.values.iter().zip(&fp.values) {
            assert!((a - b).abs() <= 1e-12, "gain {g}");
        }
    }
}

#[test]
fn shifting_by_whole_frames_keeps_the_fingerprint() {
    let cfg = FingerprintConfig::default();
    let audio = mixture(3, 8192.0 * 6.0 / 48000.0);
    let x = audio.samples();
    let shift = 2 * 8192;
    let rotated: Vec<f64> = (0..x.len()).map(|i| x[(i + shift) % x.len()]).collect();
    let a = extract_fingerprint(&audio, &cfg).unwrap();
    let b = extract_fingerprint(&Signal::new(rotated, 48000.0).unwrap(), &cfg).unwrap();
    for (p, q) in a.values.iter().zip(&b.values) {
        assert!((p - q).abs() <= 1e-12);
    }
}

#[test]
fn white_noise_has_no_peaks() {
    let noise = noise_latent(100 * 8192, 48000.0, 0.0, 9).unwrap();
    let fp = extract_fingerprint(&noise, &FingerprintConfig::default()).unwrap();
    assert!(fp.peaks().is_empty(), "{:?}", fp.peak_bins());
    let ranked = match_architecture(&fp, &[vec![8, 5, 4, 2], vec![4, 4, 4], vec![2, 2]]).unwrap();
    assert!(ranked.iter().all(|m| m.score < 0.3));
}

#[test]
fn stack_output_peaks_sit_on_the_150_hz_grid() {
    let fp = extract_fingerprint(&encodec_like(5, 200), &FingerprintConfig::default()).unwrap();
    let peaks = fp.peak_bins();
    assert!(peaks.len() >= 60);
    for b in peaks {
        let f = b as f64 * 48000.0 / 8192.0;
        let nearest = (f / 150.0).round() * 150.0;
        assert!((f - nearest).abs() <= 48000.0 / 8192.0, "peak at {f} Hz");
    }
}

#[test]
fn matching_ranks_the_true_schedule_first() {
    let fp = extract_fingerprint(&encodec_like(6, 200), &FingerprintConfig::default()).unwrap();
    let ranked = match_architecture(&fp, &[vec![4, 4, 4], vec![2, 2], vec![8, 5, 4, 2]]).unwrap();
    assert_eq!(ranked[0].strides, vec![8, 5, 4, 2]);
    assert!(ranked[0].score > ranked[1].score);

    let single = match_architecture(&fp, &[vec![3]]).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].strides, vec![3]);
    assert!(match_architecture(&fp, &[]).is_err());
}

#[test]
fn band_above_new_nyquist_is_rejected_after_resampling() {
    let down = resample(&mixture(4, 2.0), 16000.0).unwrap();
    let err = extract_fingerprint(&down, &FingerprintConfig::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)));
    let fp = extract_fingerprint(&down, &FingerprintConfig::for_rate(16000.0)).unwrap();
    assert!(*fp.bin_frequencies.last().unwrap() <= 8000.0);
}

#[test]
fn short_audio_is_insufficient() {
    let s = Signal::new(vec![0.5; 8191], 48000.0).unwrap();
    assert!(matches!(
        extract_fingerprint(&s, &FingerprintConfig::default()),
        Err(Error::InsufficientData(_))
    ));
}
