//! Parameter stores, the layer stack and the three classifiers.

pub mod audio;
pub mod factorized;
pub mod fusion;
pub mod loss;
mod params;
mod sequential;
pub mod video;

pub use factorized::{conv2plus1d, conv2plus1d_backward, Conv2Plus1DParams, Conv2Plus1DSpec, ProjectionSpec};
pub use loss::{bce_backward, bce_loss, elementwise_bce_backward, elementwise_bce_loss, one_hot, LossValue};
pub use params::{Initializer, ModelParams, Param, ParamId, ParamKind};
pub use sequential::{CountMode, FactorizedIds, ForwardCtx, Layer, ProjectionIds, ResidualIds, Sequential};
