use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Splits indices `0..labels.len()` into `(train, holdout)`, holding out
/// `round(holdout * n)` items of each label. Both parts are sorted.
pub fn stratified_split(
    labels: &[&str],
    holdout: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&holdout) {
        return Err(Error::InvalidParameter(format!(
            "holdout fraction {holdout} is not in [0, 1)"
        )));
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for idx in groups.values_mut() {
        idx.shuffle(&mut rng);
        let k = (holdout * idx.len() as f64).round() as usize;
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Shuffles `0..n` and deals it into `k` folds of near-equal size.
pub fn k_fold(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cannot make {k} folds from {n} items"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (i, v) in idx.into_iter().enumerate() {
        folds[i % k].push(v);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}
