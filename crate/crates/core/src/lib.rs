//! Late-fusion multimodal classifier built from hand-differentiated layers.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: dense row-major tensors and the forward/backward kernels
//!   (matmul, im2col convolution, activations, dropout, pooling) plus a
//!   finite-difference gradient checker.
//! - [`dsp`]: WAV ingestion and the MFCC front-end (framing, Hann window,
//!   radix-2 FFT, mel filterbank, log compression, orthonormal DCT-II).
//! - [`nn`]: parameter stores, the sequential layer stack with its gradient
//!   tape, and the three networks (video, audio, fusion head) together with
//!   the binary cross-entropy loss.
//! - [`train`]: Adam, L1/L2 penalties, dataset splitting, the training loop
//!   and confusion-matrix metrics.
//! - [`data`]: the binary tensor container, manifests, preprocessing to fixed
//!   shapes, synthetic datasets and model-directory persistence.
//! - [`pipeline`]: glue that trains and evaluates each network on loaded
//!   examples.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision used by the application layer, which is `f64`
//! throughout.

pub mod data;
pub mod dsp;
pub mod error;
pub mod nn;
pub mod pipeline;
pub mod scalar;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision tensor, the working type of every pipeline stage.
pub type Tensor64 = tensor::Tensor<f64>;
/// Single-precision tensor.
pub type Tensor32 = tensor::Tensor<f32>;
pub type ModelParams64 = nn::ModelParams<f64>;
pub type Sequential64 = nn::Sequential<f64>;
pub type VideoNet64 = nn::video::VideoNet<f64>;
pub type AudioNet64 = nn::audio::AudioNet<f64>;
pub type FusionHead64 = nn::fusion::FusionHead<f64>;
pub type ModalityOutput64 = nn::fusion::ModalityOutput<f64>;
pub type AudioClip64 = dsp::AudioClip<f64>;
