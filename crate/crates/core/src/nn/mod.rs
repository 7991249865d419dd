//! Classical layers, the quantum layer wrapper and the sequential stack.

mod activation;
mod adam;
mod batchnorm;
mod linear;
mod loss;
mod quantum;
mod rff;
mod stack;

pub use activation::Activation;
pub use adam::{adam_step, AdamState};
pub use batchnorm::{batchnorm_forward, BatchNorm, BatchNormCache, Mode};
pub use linear::{linear_forward, Linear};
pub use loss::mse_loss;
pub use quantum::{QuantumLayer, Replicate};
pub use rff::{rff_forward, RffLayer};
pub use stack::{column, row, Layer, LayerStack, ParamGroup, Section, Trace};
