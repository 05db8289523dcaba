//! Logistic-regression detector over fingerprints.
//!
//! Features are standardized per bin with statistics from the training set;
//! the model stores them so inference takes raw fingerprints. Label
//! [`REAL_LABEL`](crate::REAL_LABEL) is the negative class, every other label
//! is synthetic.

mod eval;
mod io;
mod split;

use serde::{Deserialize, Serialize};

use crate::fingerprint::{Fingerprint, FingerprintConfig};
use crate::{Error, Result, REAL_LABEL};

pub use eval::{evaluate, ClassScore, Confusion, EvalReport, DEFAULT_THRESHOLD};
pub use io::{export_weights, import_weights, write_weights_csv, MODEL_VERSION};
pub use split::{k_fold, stratified_split};

/// Outputs are clamped to `[P_MIN, 1 - P_MIN]` so they stay strictly inside (0, 1).
const P_MIN: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub l2_lambda: f64,
    /// Training stops once an epoch lowers the loss by less than this.
    pub tolerance: f64,
    /// Seeds the train/holdout split.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_epochs: 500,
            l2_lambda: 1e-4,
            tolerance: 1e-7,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter(
                "learning rate must be positive".into(),
            ));
        }
        if !(self.l2_lambda.is_finite() && self.l2_lambda >= 0.0) {
            return Err(Error::InvalidParameter(
                "l2 lambda must be non-negative".into(),
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Per-bin z-score parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub mean: f64,
    /// Always positive; constant bins get 1.
    pub std: f64,
}

/// A fingerprint with its class label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFingerprint {
    pub fingerprint: Fingerprint,
    pub label: String,
}

impl LabeledFingerprint {
    pub fn new(fingerprint: Fingerprint, label: impl Into<String>) -> Self {
        Self {
            fingerprint,
            label: label.into(),
        }
    }

    /// 1 for synthetic, 0 for real.
    pub fn target(&self) -> f64 {
        target_of(&self.label)
    }
}

pub fn target_of(label: &str) -> f64 {
    if label == REAL_LABEL {
        0.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: FingerprintConfig,
    pub sample_rate: f64,
    pub bin_frequencies: Vec<f64>,
    pub normalization: Vec<BinStats>,
    #[serde(default)]
    pub l2_lambda: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean binary cross-entropy of `sigmoid(w.x + b)` plus `l2 * |w|^2`, with its
/// exact gradient `(X^T (p - y) / n + 2 l2 w, mean(p - y))`.
pub fn logistic_loss(
    weights: &[f64],
    bias: f64,
    features: &[Vec<f64>],
    targets: &[f64],
    l2_lambda: f64,
) -> Result<(f64, Vec<f64>, f64)> {
    if features.is_empty() {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    if features.len() != targets.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows but {} targets",
            features.len(),
            targets.len()
        )));
    }
    if let Some(row) = features.iter().find(|r| r.len() != weights.len()) {
        return Err(Error::InvalidInput(format!(
            "feature row has {} entries, model has {} weights",
            row.len(),
            weights.len()
        )));
    }
    let n = features.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (x, &y) in features.iter().zip(targets) {
        let z = dot(weights, x) + bias;
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        gb += r;
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += r * xi;
        }
    }
    loss /= n;
    gb /= n;
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + 2.0 * l2_lambda * w;
    }
    loss += l2_lambda * dot(weights, weights);
    Ok((loss, gw, gb))
}

fn check_compatible(
    fp: &Fingerprint,
    config: &FingerprintConfig,
    rate: f64,
    len: usize,
) -> Result<()> {
    if fp.config != *config {
        return Err(Error::IncompatibleFingerprint(format!(
            "fingerprint configuration {:?} differs from the model's {:?}",
            fp.config, config
        )));
    }
    if fp.source_rate != rate {
        return Err(Error::IncompatibleFingerprint(format!(
            "fingerprint sample rate {} Hz differs from the model's {} Hz",
            fp.source_rate, rate
        )));
    }
    if fp.len() != len {
        return Err(Error::IncompatibleFingerprint(format!(
            "fingerprint has {} bins, the model expects {len}",
            fp.len()
        )));
    }
    Ok(())
}

impl LinearModel {
    /// All-zero model that predicts 0.5 everywhere.
    pub fn zeros(config: FingerprintConfig, sample_rate: f64, bin_frequencies: Vec<f64>) -> Self {
        let n = bin_frequencies.len();
        Self {
            weights: vec![0.0; n],
            bias: 0.0,
            config,
            sample_rate,
            bin_frequencies,
            normalization: vec![
                BinStats {
                    mean: 0.0,
                    std: 1.0
                };
                n
            ],
            l2_lambda: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 || self.bin_frequencies.len() != n || self.normalization.len() != n {
            return Err(Error::InvalidInput(
                "model weight, frequency and normalization lengths differ".into(),
            ));
        }
        if self
            .normalization
            .iter()
            .any(|s| !(s.std > 0.0 && s.std.is_finite() && s.mean.is_finite()))
        {
            return Err(Error::InvalidInput(
                "model normalization must have finite means and positive deviations".into(),
            ));
        }
        if self
            .weights
            .iter()
            .chain([&self.bias])
            .any(|w| !w.is_finite())
        {
            return Err(Error::InvalidInput("model weights must be finite".into()));
        }
        Ok(())
    }

    fn standardize(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.normalization)
            .map(|(v, s)| (v - s.mean) / s.std)
            .collect()
    }

    /// Probability that raw fingerprint values are synthetic.
    pub fn predict_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.weights.len() {
            return Err(Error::IncompatibleFingerprint(format!(
                "{} values, the model expects {}",
                values.len(),
                self.weights.len()
            )));
        }
        let z = dot(&self.weights, &self.standardize(values)) + self.bias;
        Ok(sigmoid(z).clamp(P_MIN, 1.0 - P_MIN))
    }

    /// Loss and gradient on a batch of raw fingerprints, in standardized
    /// feature space.
    pub fn loss_and_gradient(&self, batch: &[LabeledFingerprint]) -> Result<(f64, Vec<f64>, f64)> {
        let mut xs = Vec::with_capacity(batch.len());
        for item in batch {
            check_compatible(
                &item.fingerprint,
                &self.config,
                self.sample_rate,
                self.len(),
            )
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
            xs.push(self.standardize(&item.fingerprint.values));
        }
        let ys: Vec<f64> = batch.iter().map(LabeledFingerprint::target).collect();
        logistic_loss(&self.weights, self.bias, &xs, &ys, self.l2_lambda)
    }
}

/// Probability that `fp` is synthetic under `model`.
pub fn predict(model: &LinearModel, fp: &Fingerprint) -> Result<f64> {
    check_compatible(fp, &model.config, model.sample_rate, model.len())?;
    model.predict_values(&fp.values)
}

/// Full-batch gradient descent from zero weights. Deterministic: the same
/// data in the same order gives the same model bits.
pub fn train(data: &[LabeledFingerprint], tc: &TrainConfig) -> Result<LinearModel> {
    tc.validate()?;
    let first = data
        .first()
        .ok_or_else(|| Error::InvalidInput("empty training set".into()))?;
    let fp0 = &first.fingerprint;
    for item in data {
        check_compatible(&item.fingerprint, &fp0.config, fp0.source_rate, fp0.len())
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", item.label)))?;
    }
    let ys: Vec<f64> = data.iter().map(LabeledFingerprint::target).collect();
    if ys.iter().all(|&y| y == 0.0) || ys.iter().all(|&y| y == 1.0) {
        return Err(Error::InvalidInput(
            "training needs both real and synthetic examples".into(),
        ));
    }

    let dim = fp0.len();
    let n = data.len() as f64;
    let normalization: Vec<BinStats> = (0..dim)
        .map(|j| {
            let mean = data.iter().map(|d| d.fingerprint.values[j]).sum::<f64>() / n;
            let var = data
                .iter()
                .map(|d| (d.fingerprint.values[j] - mean).powi(2))
                .sum::<f64>()
                / n;
            let std = var.sqrt();
            BinStats {
                mean,
                std: if std > 1e-12 { std } else { 1.0 },
            }
        })
        .collect();

    let mut model = LinearModel::zeros(fp0.config, fp0.source_rate, fp0.bin_frequencies.clone());
    model.normalization = normalization;
    model.l2_lambda = tc.l2_lambda;
    let xs: Vec<Vec<f64>> = data
        .iter()
        .map(|d| model.standardize(&d.fingerprint.values))
        .collect();

    let mut prev = f64::INFINITY;
    for _ in 0..tc.max_epochs {
        let (loss, gw, gb) = logistic_loss(&model.weights, model.bias, &xs, &ys, tc.l2_lambda)?;
        if prev - loss < tc.tolerance {
            break;
        }
        prev = loss;
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= tc.learning_rate * g;
        }
        model.bias -= tc.learning_rate * gb;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy(values: &[[f64; 2]], labels: &[&str]) -> Vec<LabeledFingerprint> {
        // Two bins: a 48 kHz band holding exactly two bins at frame 16.
        let cfg = FingerprintConfig {
            frame_len: 16,
            band_low: 3000.0,
            band_high: 6000.0,
            min_window: 3,
            ..FingerprintConfig::default()
        };
        values
            .iter()
            .zip(labels)
            .map(|(v, l)| {
                LabeledFingerprint::new(
                    Fingerprint::from_values(v.to_vec(), 48000.0, cfg).unwrap(),
                    *l,
                )
            })
            .collect()
    }

    #[test]
    fn zero_model_loss_is_ln2() {
        let xs = vec![vec![1.0, -2.0, 0.5], vec![0.0, 3.0, 1.0]];
        let (loss, _, _) = logistic_loss(&[0.0; 3], 0.0, &xs, &[1.0, 0.0], 0.3).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(logistic_loss(&[0.0; 2], 0.0, &xs, &[1.0, 0.0], 0.0).is_err());
        assert!(logistic_loss(&[0.0; 3], 0.0, &xs, &[1.0], 0.0).is_err());
    }

    #[test]
    fn zero_model_predicts_half() {
        let data = toy(&[[0.3, 0.9]], &["real"]);
        let fp = &data[0].fingerprint;
        let m = LinearModel::zeros(fp.config, 48000.0, fp.bin_frequencies.clone());
        assert_eq!(predict(&m, fp).unwrap(), 0.5);
    }

    #[test]
    fn separable_toy_fits() {
        let data = toy(
            &[
                [0.1, 0.2],
                [0.2, 0.1],
                [0.0, 0.3],
                [1.1, 0.2],
                [1.3, 0.0],
                [0.9, 0.4],
            ],
            &["real", "real", "real", "fake", "fake", "fake"],
        );
        let tc = TrainConfig {
            learning_rate: 1.0,
            max_epochs: 5000,
            l2_lambda: 0.0,
            tolerance: 1e-12,
            seed: 0,
        };
        let m = train(&data, &tc).unwrap();
        let (loss, _, _) = m.loss_and_gradient(&data).unwrap();
        assert!(loss < 1e-2, "loss {loss}");
        for d in &data {
            let p = predict(&m, &d.fingerprint).unwrap();
            assert_eq!(p >= 0.5, d.target() == 1.0);
        }
    }

    #[test]
    fn single_class_rejected() {
        let data = toy(&[[0.1, 0.2], [0.3, 0.1]], &["real", "real"]);
        assert!(matches!(
            train(&data, &TrainConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn probabilities_stay_inside_unit_interval() {
        let data = toy(&[[0.0, 0.0]], &["real"]);
        let fp = &data[0].fingerprint;
        let mut m = LinearModel::zeros(fp.config, 48000.0, fp.bin_frequencies.clone());
        m.weights = vec![1e6, -1e6];
        for v in [[1e3, 0.0], [0.0, 1e3], [1e300, 0.0]] {
            let p = m.predict_values(&v).unwrap();
            assert!(p > 0.0 && p < 1.0 && p.is_finite());
        }
    }

    #[test]
    fn monotone_in_positive_weight_bins() {
        let data = toy(&[[0.0, 0.0]], &["real"]);
        let fp = &data[0].fingerprint;
        let mut m = LinearModel::zeros(fp.config, 48000.0, fp.bin_frequencies.clone());
        m.weights = vec![0.7, -0.2];
        let a = m.predict_values(&[0.5, 1.0]).unwrap();
        let b = m.predict_values(&[0.6, 1.0]).unwrap();
        assert!(b > a);
    }

    #[test]
    fn incompatible_fingerprints() {
        let data = toy(&[[0.0, 0.0]], &["real"]);
        let fp = &data[0].fingerprint;
        let m = LinearModel::zeros(fp.config, 48000.0, fp.bin_frequencies.clone());
        let mut other = fp.clone();
        other.config.min_window = 5;
        assert!(matches!(
            predict(&m, &other),
            Err(Error::IncompatibleFingerprint(_))
        ));
        let mut other = fp.clone();
        other.source_rate = 44100.0;
        assert!(matches!(
            predict(&m, &other),
            Err(Error::IncompatibleFingerprint(_))
        ));
        assert!(m.predict_values(&[1.0]).is_err());
    }
}
