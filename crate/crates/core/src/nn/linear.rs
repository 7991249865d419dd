use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use crate::error::{Error, Result};

/// Affine map `y = W x + b` applied row-wise to a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    /// `[out × in]`
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Linear {
    pub fn new(weight: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weight.nrows() != bias.len() {
            return Err(Error::Shape(format!(
                "weight has {} rows, bias has {} entries",
                weight.nrows(),
                bias.len()
            )));
        }
        if weight.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear layer parameter".into()));
        }
        Ok(Self { weight, bias })
    }

    /// Weights and bias uniform on `[-bound, bound]`.
    pub fn uniform<R: Rng + ?Sized>(d_in: usize, d_out: usize, bound: f64, rng: &mut R) -> Self {
        let mut draw = || if bound > 0.0 { rng.random_range(-bound..=bound) } else { 0.0 };
        let weight = Array2::from_shape_simple_fn((d_out, d_in), &mut draw);
        let bias = Array1::from_shape_simple_fn(d_out, &mut draw);
        Self { weight, bias }
    }

    /// The usual `U(-1/√in, 1/√in)` fan-in initialization.
    pub fn fan_in<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Self {
        Self::uniform(d_in, d_out, 1.0 / (d_in as f64).sqrt(), rng)
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn num_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    /// `x` is `[B × in]`.
    pub fn forward(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.in_dim() {
            return Err(Error::Shape(format!(
                "linear layer expects {} inputs, got {}",
                self.in_dim(),
                x.ncols()
            )));
        }
        Ok(x.dot(&self.weight.t()) + &self.bias)
    }

    /// Returns `(∂L/∂x, ∂L/∂W, ∂L/∂b)`.
    pub fn backward(
        &self,
        x: &Array2<f64>,
        grad_out: &Array2<f64>,
    ) -> (Array2<f64>, Array2<f64>, Array1<f64>) {
        let grad_in = grad_out.dot(&self.weight);
        let grad_w = grad_out.t().dot(x);
        let grad_b = grad_out.sum_axis(Axis(0));
        (grad_in, grad_w, grad_b)
    }
}

/// Single-vector form of [`Linear::forward`].
pub fn linear_forward(layer: &Linear, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != layer.in_dim() {
        return Err(Error::Shape(format!(
            "linear layer expects {} inputs, got {}",
            layer.in_dim(),
            x.len()
        )));
    }
    Ok((layer.weight.dot(&Array1::from(x.to_vec())) + &layer.bias).to_vec())
}
