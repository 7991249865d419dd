use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Per-feature batch normalization with learned scale and shift.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
    pub momentum: f64,
    pub eps: f64,
}

/// Values kept from a training-mode forward pass for the backward pass.
#[derive(Clone, Debug)]
pub struct BatchNormCache {
    x_hat: Array2<f64>,
    inv_std: Array1<f64>,
}

impl BatchNorm {
    pub const DEFAULT_MOMENTUM: f64 = 0.1;
    pub const DEFAULT_EPS: f64 = 1e-5;

    pub fn new(dim: usize) -> Self {
        Self::with_hyper(dim, Self::DEFAULT_MOMENTUM, Self::DEFAULT_EPS)
    }

    pub fn with_hyper(dim: usize, momentum: f64, eps: f64) -> Self {
        Self {
            gamma: Array1::ones(dim),
            beta: Array1::zeros(dim),
            running_mean: Array1::zeros(dim),
            running_var: Array1::ones(dim),
            momentum,
            eps,
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    fn check(&self, x: &Array2<f64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "batch norm over {} features, got {}",
                self.dim(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Normalizes with batch statistics and folds them into the running
    /// estimates (unbiased variance, exponential moving average).
    pub fn forward_train(&mut self, x: &Array2<f64>) -> Result<(Array2<f64>, BatchNormCache)> {
        self.check(x)?;
        let b = x.nrows();
        if b < 2 {
            return Err(Error::Invalid(format!(
                "batch norm needs at least 2 rows in training mode, got {b}"
            )));
        }
        let mean = x.mean_axis(Axis(0)).expect("non-empty batch");
        let centered = x - &mean;
        let var = centered.mapv(|v| v * v).mean_axis(Axis(0)).expect("non-empty batch");
        let inv_std = var.mapv(|v| 1.0 / (v + self.eps).sqrt());
        let x_hat = &centered * &inv_std;
        let y = &x_hat * &self.gamma + &self.beta;

        let unbiased = &var * (b as f64 / (b as f64 - 1.0));
        let m = self.momentum;
        self.running_mean = &self.running_mean * (1.0 - m) + &mean * m;
        self.running_var = &self.running_var * (1.0 - m) + &unbiased * m;
        Ok((y, BatchNormCache { x_hat, inv_std }))
    }

    /// Affine map using the running statistics.
    pub fn forward_eval(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check(x)?;
        let scale = &self.gamma / &self.running_var.mapv(|v| (v + self.eps).sqrt());
        Ok((x - &self.running_mean) * &scale + &self.beta)
    }

    /// Returns `(∂L/∂x, ∂L/∂γ, ∂L/∂β)` for a training-mode pass.
    pub fn backward(
        &self,
        cache: &BatchNormCache,
        grad_out: &Array2<f64>,
    ) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
        let b = grad_out.nrows() as f64;
        let dbeta = grad_out.sum_axis(Axis(0));
        let dgamma = (grad_out * &cache.x_hat).sum_axis(Axis(0));
        let dxhat = grad_out * &self.gamma;
        let mean_dxhat = dxhat.mean_axis(Axis(0)).expect("non-empty batch");
        let mean_dxhat_xhat = (&dxhat * &cache.x_hat)
            .mean_axis(Axis(0))
            .expect("non-empty batch");
        let _ = b;
        let dx = (&dxhat - &mean_dxhat - &(&cache.x_hat * &mean_dxhat_xhat)) * &cache.inv_std;
        (dx, dgamma, dbeta)
    }
}

/// Mode-dispatching forward pass.
pub fn batchnorm_forward(layer: &mut BatchNorm, batch: &Array2<f64>, mode: Mode) -> Result<Array2<f64>> {
    match mode {
        Mode::Train => layer.forward_train(batch).map(|(y, _)| y),
        Mode::Eval => layer.forward_eval(batch),
    }
}
