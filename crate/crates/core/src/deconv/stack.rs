use super::engine::DeconvEngine;
use super::layer::DeconvStack;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::signal::Signal;
use crate::{Error, Result};

/// Result of [`run_stack`]. `stages[0]` is the input and `stages[i + 1]` the
/// output of layer `i` after its activation; empty unless recording.
#[derive(Debug, Clone)]
pub struct StackRun {
    pub output: Signal,
    pub stages: Vec<Signal>,
}

/// Applies every layer in order, with the stack's activation between layers.
pub fn run_stack(
    input: &Signal,
    stack: &DeconvStack,
    engine: &dyn DeconvEngine,
    record: bool,
) -> Result<StackRun> {
    let rel = (input.sample_rate() - stack.input_rate()).abs() / stack.input_rate();
    if rel > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "input is sampled at {} Hz but the stack expects {} Hz",
            input.sample_rate(),
            stack.input_rate()
        )));
    }
    let mut stages = Vec::new();
    if record {
        stages.push(input.clone());
    }
    let last = stack.layers().len() - 1;
    let mut current = input.clone();
    for (i, layer) in stack.layers().iter().enumerate() {
        let mut out = engine.apply(&current, layer)?;
        if i < last {
            let act = stack.activation();
            let rate = out.sample_rate();
            out = Signal::new(
                out.into_samples()
                    .into_iter()
                    .map(|v| act.apply(v))
                    .collect(),
                rate,
            )?;
        }
        if record {
            stages.push(out.clone());
        }
        current = out;
    }
    Ok(StackRun {
        output: current,
        stages,
    })
}

/// Seeded white Gaussian noise with unit variance plus a constant `offset`.
///
/// A zero-mean latent has no DC component for the strides to clone, so
/// stacks are normally driven with a positive offset.
pub fn noise_latent(len: usize, sample_rate: f64, offset: f64, seed: u64) -> Result<Signal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z + offset
        })
        .collect();
    Signal::new(x, sample_rate)
}
