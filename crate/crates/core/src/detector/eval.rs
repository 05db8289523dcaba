use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predict, LabeledFingerprint, LinearModel};
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// Synthetic is the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub total: usize,
    pub overall_accuracy: f64,
    /// Accuracy per label; the real label scores rejections, the others detections.
    pub per_class: BTreeMap<String, ClassScore>,
    pub confusion: Confusion,
}

impl EvalReport {
    /// Builds a report from `(label, probability)` pairs.
    pub fn from_predictions(predictions: &[(String, f64)], threshold: f64) -> Result<Self> {
        if predictions.is_empty() {
            return Err(Error::InsufficientData("nothing to evaluate".into()));
        }
        let mut per_class: BTreeMap<String, ClassScore> = BTreeMap::new();
        let mut confusion = Confusion::default();
        for (label, p) in predictions {
            let positive = super::target_of(label) == 1.0;
            let flagged = *p >= threshold;
            match (positive, flagged) {
                (true, true) => confusion.true_positive += 1,
                (true, false) => confusion.false_negative += 1,
                (false, true) => confusion.false_positive += 1,
                (false, false) => confusion.true_negative += 1,
            }
            let entry = per_class.entry(label.clone()).or_insert(ClassScore {
                correct: 0,
                total: 0,
                accuracy: 0.0,
            });
            entry.total += 1;
            entry.correct += usize::from(positive == flagged);
        }
        for s in per_class.values_mut() {
            s.accuracy = s.correct as f64 / s.total as f64;
        }
        let correct = confusion.true_positive + confusion.true_negative;
        Ok(Self {
            threshold,
            total: predictions.len(),
            overall_accuracy: correct as f64 / predictions.len() as f64,
            per_class,
            confusion,
        })
    }
}

/// Scores `model` on `data` at `threshold`. Predictions run in parallel; the
/// report does not depend on scheduling.
pub fn evaluate(
    model: &LinearModel,
    data: &[LabeledFingerprint],
    threshold: f64,
) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::InsufficientData("nothing to evaluate".into()));
    }
    let preds = data
        .par_iter()
        .map(|d| Ok((d.label.clone(), predict(model, &d.fingerprint)?)))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_predictions(&preds, threshold)
}
