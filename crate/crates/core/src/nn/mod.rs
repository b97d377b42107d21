//! Dense-tensor neural-network engine: convolution, pooling, tanh, fully
//! connected layers, L2 loss and SGD. Everything runs in 64-bit floats.

mod activation;
mod conv;
mod gemm;
pub mod gradcheck;
mod layer;
mod linear;
mod loss;
mod optim;
mod params;
mod pool;
mod tensor;

#[cfg(test)]
pub(crate) mod testing;

pub use activation::{tanh_backward, tanh_forward};
pub use conv::{conv2d_backward, conv2d_forward, ConvGeometry};
pub use layer::{Conv2d, GradBuffer, Layer, LayerCache, Linear, Sequential};
pub use linear::{linear_backward, linear_forward};
pub use loss::l2_loss;
pub use optim::{sgd_step, SgdConfig};
pub use params::{LayerParams, ParamGrads};
pub use pool::{maxpool2x2_backward, maxpool2x2_forward};
pub use tensor::Tensor;
