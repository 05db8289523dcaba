//! Deconvolution (transposed convolution) layers and stacks.
//!
//! A layer with stride `k` is the same linear map whichever way it is
//! evaluated: scattering the kernel at offsets `k * i`, zero-insert
//! upsampling followed by a unit-stride convolution, or multiplying by the
//! banded matrix whose columns are shifted kernels. Each evaluation path is a
//! [`DeconvEngine`] registered by name in an [`EngineRegistry`]; stacks are
//! run through whichever engine the caller selects.
//!
//! Indexing is circular throughout so that frequency-domain identities hold
//! exactly on finite signals. The `direct-zero-pad` engine drops wrapped
//! contributions instead, which is closer to what CNN libraries do, and is
//! only meant for qualitative comparison.

mod engine;
mod layer;
mod matrix;
mod peaks;
mod stack;

pub use engine::{
    DeconvEngine, DirectEngine, EngineRegistry, MatrixEngine, UpsampleConvEngine, ZeroPadEngine,
};
pub use layer::{Activation, DeconvLayer, DeconvStack, LayerSpec, StackConfig, UpsampleMode};
pub use matrix::{deconv_matrix, strided_convolution, Matrix};
pub use peaks::{
    default_min_prominence, jaccard_overlap, match_count, measure_peaks, measure_peaks_mirrored,
    measure_peaks_windowed, peak_recall, predict_peaks, predicted_bins, PeakPrediction,
};
pub use stack::{noise_latent, run_stack, StackRun};
