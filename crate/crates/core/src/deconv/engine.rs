use std::sync::Arc;

use super::layer::{DeconvLayer, UpsampleMode};
use super::matrix::deconv_matrix;
use crate::registry::Registry;
use crate::signal::{convolve, linear_interp_upsample, zero_insert_upsample, ConvMode, Signal};
use crate::Result;

/// One way of evaluating a single deconvolution layer.
///
/// Every engine maps an input of length `N` at rate `r` to an output of
/// length `stride * N` at rate `stride * r`.
pub trait DeconvEngine: Send + Sync {
    fn name(&self) -> &'static str;

    fn apply(&self, input: &Signal, layer: &DeconvLayer) -> Result<Signal>;
}

fn output_rate(input: &Signal, layer: &DeconvLayer) -> f64 {
    input.sample_rate() * layer.stride() as f64
}

/// Scatters the kernel at offsets `stride * i` with circular wrap.
#[derive(Debug, Default, Clone, Copy)]
pub struct DirectEngine;

impl DeconvEngine for DirectEngine {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn apply(&self, input: &Signal, layer: &DeconvLayer) -> Result<Signal> {
        let k = layer.stride();
        let m = input.len() * k;
        let (taps, offset) = layer.placement();
        let mut out = vec![layer.bias(); m];
        // Start index of each scattered kernel, kept in [0, m).
        let first = (m - offset % m) % m;
        for (i, &x) in input.samples().iter().enumerate() {
            let start = (first + k * i) % m;
            for (t, &h) in taps.iter().enumerate() {
                out[(start + t) % m] += x * h;
            }
        }
        Signal::new(out, output_rate(input, layer))
    }
}

/// Upsamples (zero insertion or linear interpolation), then applies a
/// unit-stride circular convolution and the bias.
#[derive(Debug, Default, Clone, Copy)]
pub struct UpsampleConvEngine;

impl DeconvEngine for UpsampleConvEngine {
    fn name(&self) -> &'static str {
        "upsample-conv"
    }

    fn apply(&self, input: &Signal, layer: &DeconvLayer) -> Result<Signal> {
        let up = match layer.upsample_mode() {
            UpsampleMode::ZeroInsert => zero_insert_upsample(input, layer.stride())?,
            UpsampleMode::LinearInterp => linear_interp_upsample(input, layer.stride())?,
        };
        let conv = convolve(&up, layer.kernel(), ConvMode::Circular)?;
        let rate = conv.sample_rate();
        let bias = layer.bias();
        Signal::new(
            conv.into_samples().into_iter().map(|v| v + bias).collect(),
            rate,
        )
    }
}

/// Builds the `stride * N` by `N` layer matrix and multiplies.
///
/// Quadratic in the input length; meant for small inputs and cross-checks.
#[derive(Debug, Default, Clone, Copy)]
pub struct MatrixEngine;

impl DeconvEngine for MatrixEngine {
    fn name(&self) -> &'static str {
        "matrix"
    }

    fn apply(&self, input: &Signal, layer: &DeconvLayer) -> Result<Signal> {
        let mat = deconv_matrix(layer, input.len())?;
        let bias = layer.bias();
        let out = mat
            .mul_vec(input.samples())?
            .into_iter()
            .map(|v| v + bias)
            .collect();
        Signal::new(out, output_rate(input, layer))
    }
}

/// Like [`DirectEngine`] but contributions past either end are dropped, as
/// in a CNN transposed convolution with zero padding cropped to
/// `stride * N` samples. Breaks the exact spectral identities.
#[derive(Debug, Default, Clone, Copy)]
pub struct ZeroPadEngine;

impl DeconvEngine for ZeroPadEngine {
    fn name(&self) -> &'static str {
        "direct-zero-pad"
    }

    fn apply(&self, input: &Signal, layer: &DeconvLayer) -> Result<Signal> {
        let k = layer.stride();
        let m = input.len() * k;
        let (taps, offset) = layer.placement();
        let mut out = vec![layer.bias(); m];
        for (i, &x) in input.samples().iter().enumerate() {
            for (t, &h) in taps.iter().enumerate() {
                let j = (k * i + t) as isize - offset as isize;
                if (0..m as isize).contains(&j) {
                    out[j as usize] += x * h;
                }
            }
        }
        Signal::new(out, output_rate(input, layer))
    }
}

/// Engines selectable by name.
pub struct EngineRegistry {
    inner: Registry<dyn DeconvEngine>,
}

impl EngineRegistry {
    pub const DEFAULT_ENGINE: &'static str = "direct";

    pub fn empty() -> Self {
        Self {
            inner: Registry::new("deconvolution engine"),
        }
    }

    /// `direct`, `upsample-conv`, `matrix` and `direct-zero-pad`.
    pub fn with_defaults() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(DirectEngine));
        reg.register(Arc::new(UpsampleConvEngine));
        reg.register(Arc::new(MatrixEngine));
        reg.register(Arc::new(ZeroPadEngine));
        reg
    }

    pub fn register(&mut self, engine: Arc<dyn DeconvEngine>) -> &mut Self {
        self.inner.register(engine.name(), engine);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn DeconvEngine>> {
        self.inner.get(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.inner.names()
    }
}

impl Default for EngineRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Kernel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn layer(k: usize, taps: &[f64], bias: f64) -> DeconvLayer {
        DeconvLayer::new(
            k,
            Kernel::new(taps.to_vec()).unwrap(),
            bias,
            UpsampleMode::ZeroInsert,
        )
        .unwrap()
    }

    fn sig(x: &[f64]) -> Signal {
        Signal::new(x.to_vec(), 1.0).unwrap()
    }

    #[test]
    fn wrapped_kernel_on_single_sample() {
        let (a, b, c) = (2.0, 3.0, 5.0);
        let out = DirectEngine
            .apply(&sig(&[1.0]), &layer(2, &[a, b, c], 0.0))
            .unwrap();
        assert_eq!(out.samples(), &[a + c, b]);
        assert_eq!(out.sample_rate(), 2.0);
    }

    #[test]
    fn identity_kernel_places_impulse() {
        let out = DirectEngine
            .apply(&sig(&[1.0, 0.0, 0.0, 0.0]), &layer(3, &[1.0], 0.0))
            .unwrap();
        let mut expect = [0.0; 12];
        expect[0] = 1.0;
        assert_eq!(out.samples(), &expect[..]);
    }

    #[test]
    fn unit_stride_identity() {
        let x = [0.3, -1.2, 4.0];
        for engine in EngineRegistry::with_defaults().names() {
            let e = EngineRegistry::with_defaults().get(engine).unwrap();
            assert_eq!(
                e.apply(&sig(&x), &layer(1, &[1.0], 0.0)).unwrap().samples(),
                &x,
                "{engine}"
            );
        }
    }

    #[test]
    fn zero_input_gives_bias() {
        let out = UpsampleConvEngine
            .apply(&sig(&[0.0; 5]), &layer(3, &[0.4, -0.1], 0.25))
            .unwrap();
        assert!(out.samples().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn stride_one_is_convolution_plus_bias() {
        let x = [1.0, 2.0, -1.0, 0.5];
        let l = layer(1, &[0.5, 0.25], 1.0);
        let out = UpsampleConvEngine.apply(&sig(&x), &l).unwrap();
        let conv = convolve(&sig(&x), l.kernel(), ConvMode::Circular).unwrap();
        for (a, b) in out.samples().iter().zip(conv.samples()) {
            assert_eq!(*a, b + 1.0);
        }
    }

    #[test]
    fn circular_engines_agree_in_both_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let reg = EngineRegistry::with_defaults();
        let engines: Vec<_> = ["direct", "upsample-conv", "matrix"]
            .iter()
            .map(|n| reg.get(n).unwrap())
            .collect();
        for case in 0..50 {
            let n = rng.random_range(1..=12);
            let k = rng.random_range(1..=5);
            let klen = rng.random_range(1..=7);
            let mode = if case % 2 == 0 {
                UpsampleMode::ZeroInsert
            } else {
                UpsampleMode::LinearInterp
            };
            let taps = (0..klen).map(|_| rng.random_range(-1.0..1.0)).collect();
            let l = DeconvLayer::new(
                k,
                Kernel::new(taps).unwrap(),
                rng.random_range(-1.0..1.0),
                mode,
            )
            .unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let outs: Vec<_> = engines
                .iter()
                .map(|e| e.apply(&sig(&x), &l).unwrap())
                .collect();
            for o in &outs[1..] {
                for (a, b) in o.samples().iter().zip(outs[0].samples()) {
                    assert!((a - b).abs() < 1e-12, "case {case}");
                }
            }
        }
    }

    #[test]
    fn zero_pad_engine_drops_wrap() {
        let out = ZeroPadEngine
            .apply(&sig(&[1.0]), &layer(2, &[2.0, 3.0, 5.0], 0.0))
            .unwrap();
        assert_eq!(out.samples(), &[2.0, 3.0]);
    }

    #[test]
    fn unknown_engine() {
        let err = EngineRegistry::with_defaults().get("fft").err().unwrap();
        assert!(err.to_string().contains("upsample-conv"));
    }
}
