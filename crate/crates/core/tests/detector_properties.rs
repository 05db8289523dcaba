use peakprint::detector::{
    evaluate, logistic_loss, predict, train, LabeledFingerprint, TrainConfig,
};
use peakprint::fingerprint::{Fingerprint, FingerprintConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn config() -> FingerprintConfig {
    // 12 bins of 375 Hz between 3 and 7.125 kHz at frame 128.
    FingerprintConfig {
        frame_len: 128,
        band_low: 3000.0,
        band_high: 7125.0,
        min_window: 3,
        ..FingerprintConfig::default()
    }
}

/// Two overlapping Gaussian classes; the synthetic class is shifted up in a
/// few bins.
fn dataset(n: usize, seed: u64) -> Vec<LabeledFingerprint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(1.0, 0.3).unwrap();
    (0..n)
        .map(|i| {
            let fake = i % 2 == 1;
            let values: Vec<f64> = (0..12)
                .map(|b| {
                    let shift = if fake && b % 4 == 0 { 0.4 } else { 0.0 };
                    f64::max(noise.sample(&mut rng) + shift, 0.0)
                })
                .collect();
            let fp = Fingerprint::from_values(values, 48000.0, config()).unwrap();
            LabeledFingerprint::new(fp, if fake { "fake" } else { "real" })
        })
        .collect()
}

fn norm(w: &[f64]) -> f64 {
    w.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 1e-5;
    for _ in 0..100 {
        let xs: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..20).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let ys: Vec<f64> = (0..8).map(|i| (i % 2) as f64).collect();
        let w: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let (_, gw, gb) = logistic_loss(&w, b, &xs, &ys, 0.01).unwrap();
        let f = |w: &[f64], b: f64| logistic_loss(w, b, &xs, &ys, 0.01).unwrap().0;
        let mut err = 0.0;
        for j in 0..20 {
            let (mut p, mut m) = (w.clone(), w.clone());
            p[j] += h;
            m[j] -= h;
            err += ((f(&p, b) - f(&m, b)) / (2.0 * h) - gw[j]).powi(2);
        }
        err += ((f(&w, b + h) - f(&w, b - h)) / (2.0 * h) - gb).powi(2);
        let scale = (norm(&gw).powi(2) + gb * gb).sqrt();
        assert!(err.sqrt() / scale < 1e-5);
    }
}

#[test]
fn training_is_bit_deterministic() {
    let data = dataset(200, 2);
    let a = train(&data, &TrainConfig::default()).unwrap();
    let b = train(&data, &TrainConfig::default()).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert!(a
        .weights
        .iter()
        .zip(&b.weights)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn stronger_l2_never_grows_the_weights() {
    let data = dataset(200, 3);
    let norms: Vec<f64> = [1e-4, 1e-2, 1e-1]
        .iter()
        .map(|&l2| {
            let tc = TrainConfig {
                l2_lambda: l2,
                max_epochs: 20000,
                tolerance: 1e-13,
                ..TrainConfig::default()
            };
            norm(&train(&data, &tc).unwrap().weights)
        })
        .collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0]), "{norms:?}");
}

#[test]
fn per_bin_scaling_is_absorbed_by_standardization() {
    let train_set = dataset(200, 4);
    let test_set = dataset(100, 5);
    let scale: Vec<f64> = (0..12).map(|b| 0.5 + b as f64).collect();
    let rescale = |set: &[LabeledFingerprint]| -> Vec<LabeledFingerprint> {
        set.iter()
            .map(|d| {
                let v = d
                    .fingerprint
                    .values
                    .iter()
                    .zip(&scale)
                    .map(|(x, s)| x * s)
                    .collect();
                LabeledFingerprint::new(
                    Fingerprint::from_values(v, 48000.0, config()).unwrap(),
                    d.label.clone(),
                )
            })
            .collect()
    };
    let a = train(&train_set, &TrainConfig::default()).unwrap();
    let b = train(&rescale(&train_set), &TrainConfig::default()).unwrap();
    for (x, y) in test_set.iter().zip(rescale(&test_set)) {
        let pa = predict(&a, &x.fingerprint).unwrap();
        let pb = predict(&b, &y.fingerprint).unwrap();
        assert_eq!(pa >= 0.5, pb >= 0.5);
        assert!((pa - pb).abs() < 1e-9);
    }
}

#[test]
fn separable_data_is_learned_and_reported() {
    let data = dataset(400, 6);
    let model = train(&data[..300], &TrainConfig::default()).unwrap();
    let report = evaluate(&model, &data[300..], 0.5).unwrap();
    assert_eq!(report.total, 100);
    assert!(report.overall_accuracy > 0.8);
    let c = report.confusion;
    assert_eq!(
        c.true_positive + c.false_positive + c.true_negative + c.false_negative,
        100
    );
    assert!(evaluate(&model, &[], 0.5).is_err());
}
