use std::f64::consts::TAU;

use ndarray::{concatenate, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Fixed random Fourier feature map `x ↦ [cos(2πMx), sin(2πMx)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RffLayer {
    /// `[m × d_in]`, drawn once and never trained.
    pub mapping: Array2<f64>,
    pub sigma: f64,
}

impl RffLayer {
    pub const DEFAULT_SIGMA: f64 = 10.0;

    /// Entries of `M` drawn from `N(0, σ²)`.
    pub fn gaussian<R: Rng + ?Sized>(d_in: usize, m: usize, sigma: f64, rng: &mut R) -> Result<Self> {
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| Error::Invalid(format!("RFF scale {sigma}: {e}")))?;
        Ok(Self {
            mapping: Array2::from_shape_simple_fn((m, d_in), || normal.sample(rng)),
            sigma,
        })
    }

    pub fn from_mapping(mapping: Array2<f64>, sigma: f64) -> Self {
        Self { mapping, sigma }
    }

    pub fn in_dim(&self) -> usize {
        self.mapping.ncols()
    }

    /// `2m`
    pub fn out_dim(&self) -> usize {
        2 * self.mapping.nrows()
    }

    fn phases(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.in_dim() {
            return Err(Error::Shape(format!(
                "RFF layer expects {} inputs, got {}",
                self.in_dim(),
                x.ncols()
            )));
        }
        Ok(x.dot(&self.mapping.t()) * TAU)
    }

    pub fn forward(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        let p = self.phases(x)?;
        Ok(concatenate![Axis(1), p.mapv(f64::cos), p.mapv(f64::sin)])
    }

    pub fn backward(&self, x: &Array2<f64>, grad_out: &Array2<f64>) -> Result<Array2<f64>> {
        let p = self.phases(x)?;
        let m = self.mapping.nrows();
        let gc = grad_out.slice(ndarray::s![.., ..m]);
        let gs = grad_out.slice(ndarray::s![.., m..]);
        let dphase = &p.mapv(f64::cos) * &gs - &p.mapv(f64::sin) * &gc;
        Ok(dphase.dot(&self.mapping) * TAU)
    }
}

/// Single-vector form of [`RffLayer::forward`].
pub fn rff_forward(layer: &RffLayer, x: &[f64]) -> Result<Vec<f64>> {
    let row = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("one row");
    Ok(layer.forward(&row)?.row(0).to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_gives_ones_then_zeros() {
        let l = RffLayer::gaussian(2, 4, 10.0, &mut crate::rng::stream(1, 0)).unwrap();
        let y = rff_forward(&l, &[0.0, 0.0]).unwrap();
        assert_eq!(y, vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn cos_sin_pairs_have_unit_norm() {
        let l = RffLayer::gaussian(3, 5, 10.0, &mut crate::rng::stream(2, 0)).unwrap();
        let y = rff_forward(&l, &[0.3, -0.8, 0.51]).unwrap();
        for i in 0..5 {
            assert!((y[i].powi(2) + y[i + 5].powi(2) - 1.0).abs() < 1e-12);
        }
        assert!(y.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let l = RffLayer::gaussian(2, 3, 1.0, &mut crate::rng::stream(3, 0)).unwrap();
        let x = ndarray::array![[0.2, -0.4]];
        let w = ndarray::array![[0.5, -1.0, 0.3, 0.8, 0.1, -0.6]];
        let g = l.backward(&x, &w).unwrap();
        for j in 0..2 {
            let mut xp = x.clone();
            xp[[0, j]] += 1e-6;
            let up = (&l.forward(&xp).unwrap() * &w).sum();
            xp[[0, j]] -= 2e-6;
            let fd = (up - (&l.forward(&xp).unwrap() * &w).sum()) / 2e-6;
            assert!((fd - g[[0, j]]).abs() < 1e-7);
        }
    }
}
