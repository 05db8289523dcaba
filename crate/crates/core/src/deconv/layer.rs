use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::signal::{convolve, triangular_kernel, ConvMode, Kernel, Signal};
use crate::{Error, Result};

/// How a layer fills the gaps between input samples before convolving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsampleMode {
    #[default]
    ZeroInsert,
    LinearInterp,
}

/// Nonlinearity applied between layers (never after the last one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    None,
    Relu,
    /// Negative inputs are multiplied by the slope.
    LeakyRelu(f64),
}

impl Default for Activation {
    fn default() -> Self {
        Activation::LeakyRelu(Self::DEFAULT_SLOPE)
    }
}

impl Activation {
    pub const DEFAULT_SLOPE: f64 = 0.2;

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::None => x,
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu(slope) => {
                if x >= 0.0 {
                    x
                } else {
                    slope * x
                }
            }
        }
    }

    /// Accepts `none`, `relu`, `leaky_relu` and `leaky_relu:<slope>`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "none" => Ok(Activation::None),
            "relu" => Ok(Activation::Relu),
            "leaky_relu" => Ok(Activation::default()),
            other => other
                .strip_prefix("leaky_relu:")
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|s| s.is_finite())
                .map(Activation::LeakyRelu)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "unknown activation `{other}` (expected none, relu or leaky_relu)"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeconvLayer {
    stride: usize,
    kernel: Kernel,
    bias: f64,
    upsample_mode: UpsampleMode,
}

impl DeconvLayer {
    pub fn new(
        stride: usize,
        kernel: Kernel,
        bias: f64,
        upsample_mode: UpsampleMode,
    ) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if !bias.is_finite() {
            return Err(Error::InvalidParameter("bias must be finite".into()));
        }
        Ok(Self {
            stride,
            kernel,
            bias,
            upsample_mode,
        })
    }

    /// Kernel taps drawn from `U(-1, 1) / sqrt(len)`, bias from `U(0.01, 0.1)`.
    pub fn random(
        stride: usize,
        kernel_len: usize,
        upsample_mode: UpsampleMode,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if kernel_len == 0 {
            return Err(Error::InvalidParameter("kernel length must be >= 1".into()));
        }
        let scale = 1.0 / (kernel_len as f64).sqrt();
        let taps = (0..kernel_len)
            .map(|_| rng.random_range(-1.0..1.0) * scale)
            .collect();
        let bias = rng.random_range(0.01..0.1);
        Self::new(stride, Kernel::new(taps)?, bias, upsample_mode)
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn upsample_mode(&self) -> UpsampleMode {
        self.upsample_mode
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    /// Taps scattered at each input position and the offset they start at.
    ///
    /// Output sample `k * i + t - offset` (circular) receives `in[i] * taps[t]`.
    /// For linear interpolation the interpolating triangle is folded into the
    /// kernel, which is why both modes share the same three engines.
    pub fn placement(&self) -> (Vec<f64>, usize) {
        match self.upsample_mode {
            UpsampleMode::ZeroInsert => (self.kernel.taps().to_vec(), 0),
            UpsampleMode::LinearInterp => {
                let k = self.stride;
                let tri = triangular_kernel(k).expect("stride validated at construction");
                let tri = Signal::new(tri.taps().to_vec(), 1.0).expect("non-empty");
                let full = convolve(&tri, &self.kernel, ConvMode::Full).expect("non-empty");
                (full.into_samples(), k - 1)
            }
        }
    }
}

/// Ordered deconvolution layers sharing one activation.
#[derive(Debug, Clone, PartialEq)]
pub struct DeconvStack {
    layers: Vec<DeconvLayer>,
    activation: Activation,
    input_rate: f64,
}

impl DeconvStack {
    pub fn new(layers: Vec<DeconvLayer>, activation: Activation, input_rate: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter(
                "a stack needs at least one layer".into(),
            ));
        }
        if !(input_rate.is_finite() && input_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "input rate must be positive, got {input_rate}"
            )));
        }
        Ok(Self {
            layers,
            activation,
            input_rate,
        })
    }

    /// Random stack with kernels of length `2 * stride`, seeded.
    pub fn random(
        strides: &[usize],
        activation: Activation,
        input_rate: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = strides
            .iter()
            .map(|&k| DeconvLayer::random(k, 2 * k, UpsampleMode::ZeroInsert, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers, activation, input_rate)
    }

    pub fn layers(&self) -> &[DeconvLayer] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_rate(&self) -> f64 {
        self.input_rate
    }

    pub fn strides(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.stride).collect()
    }

    pub fn total_stride(&self) -> usize {
        self.layers.iter().map(|l| l.stride).product()
    }

    pub fn output_rate(&self) -> f64 {
        self.input_rate * self.total_stride() as f64
    }
}

/// One layer of a [`StackConfig`] file. Taps and bias are drawn from `seed`
/// unless given explicitly; explicit taps without a bias mean bias 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub stride: usize,
    #[serde(default)]
    pub kernel_len: usize,
    #[serde(default)]
    pub upsample_mode: UpsampleMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
}

impl LayerSpec {
    pub fn build(&self) -> Result<DeconvLayer> {
        match &self.taps {
            Some(taps) => DeconvLayer::new(
                self.stride,
                Kernel::new(taps.clone())?,
                self.bias.unwrap_or(0.0),
                self.upsample_mode,
            ),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let layer = DeconvLayer::random(
                    self.stride,
                    self.kernel_len,
                    self.upsample_mode,
                    &mut rng,
                )?;
                Ok(match self.bias {
                    Some(b) => layer.with_bias(b),
                    None => layer,
                })
            }
        }
    }
}

/// JSON description of a randomly initialised stack.
///
/// ```json
/// {"input_rate": 150, "activation": "leaky_relu",
///  "layers": [{"stride": 8, "kernel_len": 16, "upsample_mode": "zero_insert", "seed": 1}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub input_rate: f64,
    #[serde(default = "default_activation_name")]
    pub activation: String,
    pub layers: Vec<LayerSpec>,
}

fn default_activation_name() -> String {
    "leaky_relu".into()
}

impl StackConfig {
    /// Config whose layers use kernels of `2 * stride` taps and seeds
    /// `seed, seed + 1, ...`.
    pub fn from_strides(strides: &[usize], input_rate: f64, seed: u64) -> Self {
        Self {
            input_rate,
            activation: default_activation_name(),
            layers: strides
                .iter()
                .enumerate()
                .map(|(i, &k)| LayerSpec {
                    stride: k,
                    kernel_len: 2 * k,
                    upsample_mode: UpsampleMode::ZeroInsert,
                    seed: seed.wrapping_add(i as u64),
                    taps: None,
                    bias: None,
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    /// Builds every layer; random layers use their own seeds.
    pub fn build(&self) -> Result<DeconvStack> {
        let layers = self
            .layers
            .iter()
            .map(LayerSpec::build)
            .collect::<Result<Vec<_>>>()?;
        DeconvStack::new(
            layers,
            Activation::parse(&self.activation)?,
            self.input_rate,
        )
    }
}
