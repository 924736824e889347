//! Halftoning as transmission through a binary noisy printing channel.
//!
//! A grayscale image is halftoned into a binary ink pattern, passed through
//! controlled-gate noise (bit-flip, erase, block erase) and compared with
//! its noisy copy using entropy, RMS distance and relative entropy. The
//! [`robustness`] module runs seeded sweeps of that pipeline and compares
//! halftoning algorithms by their mean relative entropy.
//!
//! Information measures are generic over [`Real`]; the aliases below fix
//! the scalar to `f64` or `f32`.

pub mod channel;
pub mod cli;
pub mod halftone;
pub mod imagery;
pub mod metrics;
pub mod robustness;
pub mod scalar;

pub use channel::{
    apply_gate, bsc_capacity, gen_noise, transmit, transmit_bitflip, transmit_block_erase,
    transmit_erase, BlockSpec, Channel, ChannelConfig, ChannelError, GateOp, NoiseKind, NoisePower,
};
pub use halftone::{halftone, HalftoneError, HalftoneSpec};
pub use imagery::{BinaryImage, GrayImage, ImageError};
pub use metrics::{
    binary_entropy, euclidean_distance, image_relative_entropy, noise_entropy_curve,
    relative_entropy, HistogramMode, MetricsError,
};
pub use robustness::{
    compare, corpus_average, difference_surface, is_epsilon_robust, run_sweep, run_sweep_on,
    RobustnessRecord, SweepError, SweepSpec,
};
pub use scalar::Real;

pub type Histogram64 = imagery::Histogram<f64>;
pub type Histogram32 = imagery::Histogram<f32>;
pub type Divergence64 = metrics::Divergence<f64>;
pub type Divergence32 = metrics::Divergence<f32>;
pub type Smoothing64 = metrics::Smoothing<f64>;
pub type Smoothing32 = metrics::Smoothing<f32>;
pub type HistogramSpec64 = metrics::HistogramSpec<f64>;
pub type HistogramSpec32 = metrics::HistogramSpec<f32>;
pub type EntropyPoint64 = metrics::EntropyPoint<f64>;
