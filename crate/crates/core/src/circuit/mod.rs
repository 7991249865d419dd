//! Data re-uploading circuits: construction, evaluation and analytic gradients.

mod exec;
mod spec;

pub use exec::{
    circuit_forward, circuit_forward_batch, circuit_forward_with_noise,
    circuit_gradient_adjoint, circuit_gradient_paramshift, circuit_state, circuit_vjp,
    gate_count, GradWrt,
};
pub use spec::{CircuitParams, CircuitSpec, Entangler};

#[cfg(test)]
mod tests;
