//! A small sequential neural-network engine.
//!
//! Layers are free functions over [`Tensor`](crate::tensor::Tensor)s that
//! return the forward result together with a cache for the backward pass.
//! [`Network`] strings them together for a fixed layer list, and
//! [`adam_step`] / [`l2_penalty`] cover optimisation.

mod activation;
mod adam;
mod conv;
mod dense;
mod l2;
mod layer;
mod loss;
pub(crate) mod network;
mod pool;
mod state;

pub use activation::{dropout_backward, dropout_forward, relu, relu_backward, DropoutCache, ReluCache};
pub use adam::{adam_step, TrainConfig};
pub use conv::{conv2d_backward, conv2d_forward, ConvCache, ConvGrads};
pub use dense::{dense_backward, dense_forward, DenseCache, DenseGrads};
pub use l2::l2_penalty;
pub use layer::{output_extent, LayerKind, LayerSpec};
pub use loss::{softmax, softmax_cross_entropy, SoftmaxCrossEntropy};
pub use network::{Forward, Gradients, LayerCache, Mode, Network};
pub use pool::{maxpool_backward, maxpool_forward, PoolCache};
pub use state::{LayerState, Moments, ParamGrads};
