use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::batchnorm::{BatchNorm, BatchNormCache, Mode};
use super::linear::Linear;
use super::loss::mse_loss;
use super::quantum::{QuantumLayer, Replicate};
use super::rff::RffLayer;
use crate::circuit::CircuitParams;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Linear(Linear),
    BatchNorm(BatchNorm),
    Activation(Activation),
    Rff(RffLayer),
    Quantum(QuantumLayer),
    Replicate(Replicate),
}

/// Optimizer group a trainable parameter belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamGroup {
    Classical,
    Quantum,
}

/// A named contiguous slice of a layer's state, used by checkpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub len: usize,
    pub trainable: bool,
}

enum Cache {
    None,
    BatchNorm(BatchNormCache),
    Quantum(Option<Array2<f64>>),
}

/// Everything a training-mode forward pass keeps for the backward pass.
pub struct Trace {
    inputs: Vec<Array2<f64>>,
    caches: Vec<Cache>,
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Linear(_) => "linear",
            Layer::BatchNorm(_) => "batchnorm",
            Layer::Activation(_) => "activation",
            Layer::Rff(_) => "rff",
            Layer::Quantum(_) => "quantum",
            Layer::Replicate(_) => "replicate",
        }
    }

    /// Input width, if the layer fixes one.
    pub fn in_dim(&self) -> Option<usize> {
        match self {
            Layer::Linear(l) => Some(l.in_dim()),
            Layer::BatchNorm(b) => Some(b.dim()),
            Layer::Activation(_) => None,
            Layer::Rff(r) => Some(r.in_dim()),
            Layer::Quantum(q) => Some(q.in_dim()),
            Layer::Replicate(r) => Some(r.d_in),
        }
    }

    pub fn out_dim(&self, d_in: usize) -> usize {
        match self {
            Layer::Linear(l) => l.out_dim(),
            Layer::BatchNorm(b) => b.dim(),
            Layer::Activation(_) => d_in,
            Layer::Rff(r) => r.out_dim(),
            Layer::Quantum(q) => q.out_dim(),
            Layer::Replicate(r) => r.d_out,
        }
    }

    pub fn num_params(&self) -> usize {
        match self {
            Layer::Linear(l) => l.num_params(),
            Layer::BatchNorm(b) => 2 * b.dim(),
            Layer::Quantum(q) => q.params.len(),
            _ => 0,
        }
    }

    fn group(&self) -> ParamGroup {
        match self {
            Layer::Quantum(_) => ParamGroup::Quantum,
            _ => ParamGroup::Classical,
        }
    }

    fn params_into(&self, out: &mut Vec<f64>) {
        match self {
            Layer::Linear(l) => {
                out.extend(l.weight.iter());
                out.extend(l.bias.iter());
            }
            Layer::BatchNorm(b) => {
                out.extend(b.gamma.iter());
                out.extend(b.beta.iter());
            }
            Layer::Quantum(q) => out.extend_from_slice(q.params.as_slice()),
            _ => {}
        }
    }

    fn set_params(&mut self, src: &[f64]) {
        match self {
            Layer::Linear(l) => {
                let nw = l.weight.len();
                l.weight.iter_mut().zip(&src[..nw]).for_each(|(d, s)| *d = *s);
                l.bias.iter_mut().zip(&src[nw..]).for_each(|(d, s)| *d = *s);
            }
            Layer::BatchNorm(b) => {
                let n = b.dim();
                b.gamma.iter_mut().zip(&src[..n]).for_each(|(d, s)| *d = *s);
                b.beta.iter_mut().zip(&src[n..]).for_each(|(d, s)| *d = *s);
            }
            Layer::Quantum(q) => q.params.as_mut_slice().copy_from_slice(src),
            _ => {}
        }
    }

    /// Non-trainable state that still determines outputs.
    fn buffers_into(&self, out: &mut Vec<f64>) {
        match self {
            Layer::BatchNorm(b) => {
                out.extend(b.running_mean.iter());
                out.extend(b.running_var.iter());
            }
            Layer::Rff(r) => out.extend(r.mapping.iter()),
            _ => {}
        }
    }

    fn num_buffers(&self) -> usize {
        match self {
            Layer::BatchNorm(b) => 2 * b.dim(),
            Layer::Rff(r) => r.mapping.len(),
            _ => 0,
        }
    }

    fn set_buffers(&mut self, src: &[f64]) {
        match self {
            Layer::BatchNorm(b) => {
                let n = b.dim();
                b.running_mean.iter_mut().zip(&src[..n]).for_each(|(d, s)| *d = *s);
                b.running_var.iter_mut().zip(&src[n..]).for_each(|(d, s)| *d = *s);
            }
            Layer::Rff(r) => r.mapping.iter_mut().zip(src).for_each(|(d, s)| *d = *s),
            _ => {}
        }
    }

    fn sections(&self, index: usize) -> Vec<Section> {
        let s = |name: &str, len: usize, trainable: bool| Section {
            name: format!("{index}.{}.{name}", self.kind()),
            len,
            trainable,
        };
        match self {
            Layer::Linear(l) => vec![s("weight", l.weight.len(), true), s("bias", l.bias.len(), true)],
            Layer::BatchNorm(b) => vec![
                s("gamma", b.dim(), true),
                s("beta", b.dim(), true),
                s("running_mean", b.dim(), false),
                s("running_var", b.dim(), false),
            ],
            Layer::Rff(r) => vec![s("mapping", r.mapping.len(), false)],
            Layer::Quantum(q) => vec![s("angles", q.params.len(), true)],
            _ => vec![],
        }
    }

    fn forward_train(&mut self, x: &Array2<f64>) -> Result<(Array2<f64>, Cache)> {
        Ok(match self {
            Layer::Linear(l) => (l.forward(x)?, Cache::None),
            Layer::BatchNorm(b) => {
                let (y, c) = b.forward_train(x)?;
                (y, Cache::BatchNorm(c))
            }
            Layer::Activation(a) => (a.forward(x), Cache::None),
            Layer::Rff(r) => (r.forward(x)?, Cache::None),
            Layer::Quantum(q) => {
                let (y, noise) = q.forward_train(x)?;
                (y, Cache::Quantum(noise))
            }
            Layer::Replicate(r) => (r.forward(x)?, Cache::None),
        })
    }

    fn forward_eval(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        match self {
            Layer::Linear(l) => l.forward(x),
            Layer::BatchNorm(b) => b.forward_eval(x),
            Layer::Activation(a) => Ok(a.forward(x)),
            Layer::Rff(r) => r.forward(x),
            Layer::Quantum(q) => q.forward_eval(x),
            Layer::Replicate(r) => r.forward(x),
        }
    }

    fn backward(&self, x: &Array2<f64>, cache: &Cache, grad_out: &Array2<f64>) -> Result<(Array2<f64>, Vec<f64>)> {
        Ok(match (self, cache) {
            (Layer::Linear(l), _) => {
                let (gi, gw, gb) = l.backward(x, grad_out);
                (gi, gw.iter().chain(gb.iter()).copied().collect())
            }
            (Layer::BatchNorm(b), Cache::BatchNorm(c)) => {
                let (gi, gg, gb) = b.backward(c, grad_out);
                (gi, gg.iter().chain(gb.iter()).copied().collect())
            }
            (Layer::BatchNorm(_), _) => unreachable!("batch norm trace without cache"),
            (Layer::Activation(a), _) => (a.backward(x, grad_out), vec![]),
            (Layer::Rff(r), _) => (r.backward(x, grad_out)?, vec![]),
            (Layer::Quantum(q), Cache::Quantum(noise)) => q.backward(x, noise.as_ref(), grad_out)?,
            (Layer::Quantum(_), _) => unreachable!("quantum trace without cache"),
            (Layer::Replicate(r), _) => (r.backward(grad_out), vec![]),
        })
    }
}

/// A sequential model. Parameters are exposed as one flat vector in layer
/// order (Linear: weight row-major then bias; BatchNorm: γ then β; Quantum:
/// angles).
#[derive(Clone, Debug, PartialEq)]
pub struct LayerStack {
    layers: Vec<Layer>,
    d_in: usize,
}

impl LayerStack {
    /// Checks that consecutive layer widths agree, starting from `d_in`.
    pub fn new(d_in: usize, layers: Vec<Layer>) -> Result<Self> {
        let mut width = d_in;
        for (i, layer) in layers.iter().enumerate() {
            if let Some(expected) = layer.in_dim() {
                if expected != width {
                    return Err(Error::LayerDim {
                        layer: i,
                        detail: format!(
                            "{} layer expects width {expected}, previous layer produces {width}",
                            layer.kind()
                        ),
                    });
                }
            }
            width = layer.out_dim(width);
        }
        Ok(Self { layers, d_in })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.d_in
    }

    pub fn out_dim(&self) -> usize {
        self.layers.iter().fold(self.d_in, |w, l| l.out_dim(w))
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Layer::num_params).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            l.params_into(&mut out);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "model has {} parameters, got {}",
                self.num_params(),
                flat.len()
            )));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let n = l.num_params();
            l.set_params(&flat[off..off + n]);
            off += n;
        }
        Ok(())
    }

    pub fn param_groups(&self) -> Vec<ParamGroup> {
        self.layers
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.group(), l.num_params()))
            .collect()
    }

    pub fn buffers(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            l.buffers_into(&mut out);
        }
        out
    }

    pub fn num_buffers(&self) -> usize {
        self.layers.iter().map(Layer::num_buffers).sum()
    }

    pub fn set_buffers(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_buffers() {
            return Err(Error::Shape(format!(
                "model has {} buffer values, got {}",
                self.num_buffers(),
                flat.len()
            )));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let n = l.num_buffers();
            l.set_buffers(&flat[off..off + n]);
            off += n;
        }
        Ok(())
    }

    /// Named sections: all trainable sections in parameter order, then buffers.
    pub fn sections(&self) -> Vec<Section> {
        let all: Vec<Section> = self
            .layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.sections(i))
            .collect();
        let (mut params, buffers): (Vec<_>, Vec<_>) = all.into_iter().partition(|s| s.trainable);
        params.extend(buffers);
        params
    }

    fn check_input(&self, x: &Array2<f64>) -> Result<()> {
        if x.ncols() != self.d_in {
            return Err(Error::LayerDim {
                layer: 0,
                detail: format!("model expects {} inputs, got {}", self.d_in, x.ncols()),
            });
        }
        Ok(())
    }

    fn check_finite(layer: usize, y: &Array2<f64>) -> Result<()> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                epoch: 0,
                layer,
                detail: "non-finite activation".into(),
            });
        }
        Ok(())
    }

    /// Training-mode pass (batch statistics, fresh noise) recording a trace.
    pub fn forward_train(&mut self, x: &Array2<f64>) -> Result<(Array2<f64>, Trace)> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let (y, cache) = layer.forward_train(&cur).map_err(|e| at_layer(i, e))?;
            Self::check_finite(i, &y)?;
            inputs.push(std::mem::replace(&mut cur, y));
            caches.push(cache);
        }
        Ok((cur, Trace { inputs, caches }))
    }

    /// Evaluation-mode pass (running statistics, fixed noise stream).
    pub fn predict(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            cur = layer.forward_eval(&cur).map_err(|e| at_layer(i, e))?;
            Self::check_finite(i, &cur)?;
        }
        Ok(cur)
    }

    pub fn forward(&mut self, x: &Array2<f64>, mode: Mode) -> Result<Array2<f64>> {
        match mode {
            Mode::Train => self.forward_train(x).map(|(y, _)| y),
            Mode::Eval => self.predict(x),
        }
    }

    /// Reverse sweep; returns the flat parameter gradient.
    pub fn backward(&self, trace: &Trace, grad_out: &Array2<f64>) -> Result<Vec<f64>> {
        let mut per_layer: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        let mut grad = grad_out.clone();
        for i in (0..self.layers.len()).rev() {
            let (gi, gp) = self.layers[i]
                .backward(&trace.inputs[i], &trace.caches[i], &grad)
                .map_err(|e| at_layer(i, e))?;
            per_layer[i] = gp;
            grad = gi;
        }
        Ok(per_layer.concat())
    }

    /// Training-mode forward, MSE against `targets`, and the full gradient.
    pub fn backprop(&mut self, batch: &Array2<f64>, targets: &Array2<f64>) -> Result<(f64, Vec<f64>)> {
        let (pred, trace) = self.forward_train(batch)?;
        let (loss, grad) = mse_loss(&pred, targets)?;
        Ok((loss, self.backward(&trace, &grad)?))
    }

    /// Parameters of the `index`-th quantum layer.
    pub fn circuit_params(&self, index: usize) -> Option<&CircuitParams> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Quantum(q) => Some(&q.params),
                _ => None,
            })
            .nth(index)
    }
}

fn at_layer(layer: usize, e: Error) -> Error {
    match e {
        Error::Shape(detail) => Error::LayerDim { layer, detail },
        Error::Diverged { epoch, detail, .. } => Error::Diverged { epoch, layer, detail },
        other => other,
    }
}

/// Convenience for a one-row batch.
pub fn row(x: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("one row")
}

/// Convenience for a column of scalars.
pub fn column(x: &[f64]) -> Array2<f64> {
    Array1::from(x.to_vec()).insert_axis(ndarray::Axis(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitSpec;
    use crate::rng;

    fn hybrid(seed: u64) -> LayerStack {
        let mut r = rng::stream(seed, 0);
        let spec = CircuitSpec::new(3, 2, 1).unwrap();
        let params = CircuitParams::random(&spec, &mut r);
        LayerStack::new(
            1,
            vec![
                Layer::Linear(Linear::fan_in(1, 3, &mut r)),
                Layer::BatchNorm(BatchNorm::new(3)),
                Layer::Activation(Activation::Tanh),
                Layer::Quantum(QuantumLayer::new(spec, params, seed).unwrap()),
                Layer::Linear(Linear::fan_in(3, 1, &mut r)),
            ],
        )
        .unwrap()
    }

    fn data() -> (Array2<f64>, Array2<f64>) {
        let xs: Vec<f64> = (0..6).map(|i| -1.0 + 0.4 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        (column(&xs), column(&ys))
    }

    #[test]
    fn width_mismatch_names_the_layer() {
        let mut r = rng::stream(0, 0);
        let err = LayerStack::new(
            2,
            vec![
                Layer::Linear(Linear::fan_in(2, 4, &mut r)),
                Layer::Activation(Activation::Relu),
                Layer::Linear(Linear::fan_in(3, 1, &mut r)),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::LayerDim { layer: 2, .. }));
    }

    #[test]
    fn params_round_trip_and_groups() {
        let mut m = hybrid(1);
        let p = m.params();
        assert_eq!(p.len(), 3 * 2 + 6 + 18 + 4);
        let groups = m.param_groups();
        assert_eq!(groups.iter().filter(|g| **g == ParamGroup::Quantum).count(), 18);
        let shifted: Vec<f64> = p.iter().map(|v| v + 0.5).collect();
        m.set_params(&shifted).unwrap();
        assert_eq!(m.params(), shifted);
        assert!(m.set_params(&p[1..]).is_err());
        let total: usize = m.sections().iter().map(|s| s.len).sum();
        assert_eq!(total, m.num_params() + m.num_buffers());
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let model = hybrid(4);
        let (x, y) = data();
        let (_, grad) = model.clone().backprop(&x, &y).unwrap();
        let p0 = model.params();
        let loss_at = |p: &[f64]| {
            let mut m = model.clone();
            m.set_params(p).unwrap();
            let (pred, _) = m.forward_train(&x).unwrap();
            mse_loss(&pred, &y).unwrap().0
        };
        for j in 0..p0.len() {
            let mut p = p0.clone();
            p[j] += 1e-6;
            let up = loss_at(&p);
            p[j] -= 2e-6;
            let down = loss_at(&p);
            let fd = (up - down) / 2e-6;
            assert!((grad[j] - fd).abs() < 1e-6 * (1.0 + fd.abs()), "param {j}: {} vs {fd}", grad[j]);
        }
    }

    #[test]
    fn nan_input_reports_diverged_layer() {
        let mut r = rng::stream(0, 0);
        let mut w = Linear::fan_in(1, 1, &mut r);
        w.weight[[0, 0]] = f64::INFINITY;
        let m = LayerStack::new(
            1,
            vec![Layer::Activation(Activation::Relu), Layer::Linear(w)],
        )
        .unwrap();
        let err = m.predict(&column(&[0.0])).unwrap_err();
        assert!(matches!(err, Error::Diverged { layer: 1, .. }));
    }

    #[test]
    fn eval_is_repeatable_under_noise() {
        let spec = CircuitSpec::new(2, 1, 1).unwrap().noise(0.2).unwrap();
        let params = CircuitParams::zeros(&spec);
        let m = LayerStack::new(2, vec![Layer::Quantum(QuantumLayer::new(spec, params, 9).unwrap())]).unwrap();
        let x = ndarray::array![[0.1, 0.2], [0.3, -0.4]];
        assert_eq!(m.predict(&x).unwrap(), m.predict(&x).unwrap());
        let mut t = m.clone();
        let a = t.forward_train(&x).unwrap().0;
        let b = t.forward_train(&x).unwrap().0;
        assert_ne!(a, b);
    }
}
