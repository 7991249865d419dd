use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bias-corrected Adam with a per-parameter learning rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPS: f64 = 1e-8;

    pub fn new(lr: Vec<f64>) -> Self {
        let n = lr.len();
        Self {
            lr,
            beta1: Self::BETA1,
            beta2: Self::BETA2,
            eps: Self::EPS,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    pub fn uniform(num_params: usize, lr: f64) -> Self {
        Self::new(vec![lr; num_params])
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

/// One Adam update of `params` in place.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    if params.len() != state.len() || grads.len() != state.len() {
        return Err(Error::Shape(format!(
            "optimizer tracks {} parameters, got {} params and {} gradients",
            state.len(),
            params.len(),
            grads.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!(
            "gradient of parameter {i} is {} at step {}",
            grads[i],
            state.step + 1
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= state.lr[i] * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr_against_gradient_sign() {
        let mut s = AdamState::uniform(3, 1e-3);
        let mut p = vec![1.0, 1.0, 1.0];
        adam_step(&mut s, &mut p, &[0.5, -20.0, 3e-3]).unwrap();
        assert!((p[0] - (1.0 - 1e-3)).abs() < 1e-10);
        assert!((p[1] - (1.0 + 1e-3)).abs() < 1e-10);
        assert!((p[2] - (1.0 - 1e-3)).abs() < 1e-8);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = AdamState::uniform(2, 0.1);
        let mut p = vec![0.3, -0.2];
        for _ in 0..100 {
            adam_step(&mut s, &mut p, &[0.0, 0.0]).unwrap();
        }
        assert_eq!(p, vec![0.3, -0.2]);
    }

    #[test]
    fn nan_gradient_rejected_without_update() {
        let mut s = AdamState::uniform(2, 0.1);
        let mut p = vec![0.3, -0.2];
        assert!(matches!(
            adam_step(&mut s, &mut p, &[f64::NAN, 0.0]),
            Err(Error::NonFinite(_))
        ));
        assert_eq!(p, vec![0.3, -0.2]);
        assert_eq!(s.step, 0);
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let run = || {
            let mut s = AdamState::new(vec![1e-2, 5e-3]);
            let mut p = vec![0.7, -1.1];
            for k in 0..50 {
                let g = [p[0] * 2.0 + k as f64 * 1e-3, (p[1] - 0.5).sin()];
                adam_step(&mut s, &mut p, &g).unwrap();
            }
            p
        };
        let (a, b) = (run(), run());
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }
}
