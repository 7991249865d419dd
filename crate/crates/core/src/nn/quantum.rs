use ndarray::Array2;
use rayon::prelude::*;

use crate::circuit::{circuit_forward_batch, circuit_vjp, CircuitParams, CircuitSpec};
use crate::error::{Error, Result};
use crate::rng;
use crate::sim::sample_noise_angles;

/// Stream reserved for noise in evaluation passes, so evaluation is
/// reproducible regardless of how many training passes preceded it.
const EVAL_STREAM: u64 = u64::MAX;

/// A re-uploading circuit used as a network layer: row `h` of the input
/// batch is encoded, and the `d_f` expectation values form the output row.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumLayer {
    pub spec: CircuitSpec,
    pub params: CircuitParams,
    noise_seed: u64,
    noise_calls: u64,
}

impl QuantumLayer {
    pub fn new(spec: CircuitSpec, params: CircuitParams, noise_seed: u64) -> Result<Self> {
        if params.len() != spec.num_params() {
            return Err(Error::Shape(format!(
                "circuit expects {} parameters, got {}",
                spec.num_params(),
                params.len()
            )));
        }
        Ok(Self {
            spec,
            params,
            noise_seed,
            noise_calls: 0,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.spec.num_features()
    }

    pub fn out_dim(&self) -> usize {
        self.spec.num_outputs()
    }

    fn draw_noise(&self, rows: usize, stream: u64) -> Result<Option<Array2<f64>>> {
        if self.spec.noise_bound() == 0.0 {
            return Ok(None);
        }
        let nq = self.spec.num_qubits();
        let mut r = rng::stream(self.noise_seed, stream);
        let mut m = Array2::zeros((rows, nq));
        for mut row in m.rows_mut() {
            let a = sample_noise_angles(nq, self.spec.noise_bound(), &mut r)?;
            row.assign(&ndarray::Array1::from(a));
        }
        Ok(Some(m))
    }

    /// Training pass; every call draws a fresh noise realization. Returns the
    /// realization so the backward pass can differentiate through it.
    pub fn forward_train(&mut self, x: &Array2<f64>) -> Result<(Array2<f64>, Option<Array2<f64>>)> {
        let noise = self.draw_noise(x.nrows(), self.noise_calls)?;
        if noise.is_some() {
            self.noise_calls += 1;
        }
        let y = circuit_forward_batch(&self.spec, &self.params, x, noise.as_ref())?;
        Ok((y, noise))
    }

    pub fn forward_eval(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        let noise = self.draw_noise(x.nrows(), EVAL_STREAM)?;
        circuit_forward_batch(&self.spec, &self.params, x, noise.as_ref())
    }

    /// Input gradient and summed parameter gradient, one adjoint sweep per row.
    pub fn backward(
        &self,
        x: &Array2<f64>,
        noise: Option<&Array2<f64>>,
        grad_out: &Array2<f64>,
    ) -> Result<(Array2<f64>, Vec<f64>)> {
        let rows: Vec<usize> = (0..x.nrows()).collect();
        let per_row: Vec<(Vec<f64>, Vec<f64>)> = rows
            .par_iter()
            .map(|&r| {
                let h = x.row(r).to_vec();
                let w = grad_out.row(r).to_vec();
                let nz = noise.map(|m| m.row(r).to_vec());
                circuit_vjp(&self.spec, &self.params, &h, &w, nz.as_deref())
            })
            .collect::<Result<_>>()?;
        let mut grad_params = vec![0.0; self.params.len()];
        let mut grad_in = Array2::zeros(x.dim());
        for (r, (gp, gh)) in per_row.into_iter().enumerate() {
            for (acc, g) in grad_params.iter_mut().zip(&gp) {
                *acc += g;
            }
            grad_in.row_mut(r).assign(&ndarray::Array1::from(gh));
        }
        Ok((grad_in, grad_params))
    }
}

/// Parameter-free fan-out: output `j` copies input `j mod d_in`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Replicate {
    pub d_in: usize,
    pub d_out: usize,
}

impl Replicate {
    pub fn forward(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.d_in {
            return Err(Error::Shape(format!(
                "replicate expects {} inputs, got {}",
                self.d_in,
                x.ncols()
            )));
        }
        Ok(Array2::from_shape_fn((x.nrows(), self.d_out), |(r, j)| {
            x[[r, j % self.d_in]]
        }))
    }

    pub fn backward(&self, grad_out: &Array2<f64>) -> Array2<f64> {
        let mut g = Array2::zeros((grad_out.nrows(), self.d_in));
        for ((r, j), v) in grad_out.indexed_iter() {
            g[[r, j % self.d_in]] += v;
        }
        g
    }
}
