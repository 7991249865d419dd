use rand::Rng;

use super::state::{apply_rx, StateVector};
use crate::error::{Error, Result};

/// Draws one angle per qubit, uniform on `[0, noise_bound]`. A zero bound
/// draws nothing.
pub fn sample_noise_angles<R: Rng + ?Sized>(
    num_qubits: usize,
    noise_bound: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(noise_bound >= 0.0) || !noise_bound.is_finite() {
        return Err(Error::Invalid(format!(
            "noise bound must be finite and non-negative, got {noise_bound}"
        )));
    }
    if noise_bound == 0.0 {
        return Ok(vec![0.0; num_qubits]);
    }
    Ok((0..num_qubits)
        .map(|_| rng.random::<f64>() * noise_bound)
        .collect())
}

/// Pre-measurement noise: `RX(θ_q)` on every qubit with `θ_q ~ U(0, noise_bound)`.
pub fn inject_measurement_noise<R: Rng + ?Sized>(
    state: &mut StateVector,
    noise_bound: f64,
    rng: &mut R,
) -> Result<()> {
    let angles = sample_noise_angles(state.num_qubits(), noise_bound, rng)?;
    if noise_bound > 0.0 {
        apply_noise_angles(state, &angles);
    }
    Ok(())
}

pub(crate) fn apply_noise_angles(state: &mut StateVector, angles: &[f64]) {
    let n = state.num_qubits();
    for (q, &theta) in angles.iter().enumerate() {
        apply_rx(state.amplitudes_mut(), n, q, theta);
    }
}
