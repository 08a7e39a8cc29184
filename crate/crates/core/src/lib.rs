//! Grading of electromagnetic-interference noise in analog video frames.
//!
//! The crate covers the whole pipeline:
//!
//! - [`synth`] renders a 75% colour-bar test pattern in YCbCr and injects
//!   narrowband interference at five severity levels, writing labelled
//!   datasets of `EMIF` frame files.
//! - [`preprocess`] turns a frame into a `1×227×227` luma tensor in `[0, 1]`
//!   and provides the random flip augmentation used during training.
//! - [`nn`] is a small CPU neural-network engine (convolution, max-pool,
//!   ReLU, dense, dropout, fused softmax/cross-entropy, Adam, L2).
//! - [`model`] holds the four classifier architectures, from a one-channel
//!   AlexNet down to a 140k-parameter network.
//! - [`metrics`] provides PSNR and per-class precision/recall/F1 reports.
//! - [`harness`] ties it together: checkpoints, configuration, and the
//!   `gen`/`train`/`eval`/`grade`/`psnr` commands behind the `emigrade` binary.

pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod preprocess;
pub mod rng;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use model::{build_model, param_count, ModelId, ModelSpec};
pub use synth::{Frame, NoiseLevel, NoiseParams, Range};
pub use tensor::Tensor;
