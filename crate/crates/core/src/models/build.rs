use ndarray::Array2;

use super::config::{Family, ModelConfig};
use crate::circuit::{CircuitParams, CircuitSpec};
use crate::error::Result;
use crate::nn::{Activation, BatchNorm, Layer, LayerStack, Linear, QuantumLayer, Replicate, RffLayer};
use crate::rng;

/// A built network together with the configuration it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub stack: LayerStack,
}

impl Model {
    pub fn num_params(&self) -> usize {
        self.stack.num_params()
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.stack.predict(x)
    }
}

fn circuit(cfg: &ModelConfig, features: usize) -> Result<CircuitSpec> {
    CircuitSpec::new(features, cfg.reuploads, cfg.blocks)?
        .entangler(cfg.entangler)
        .noise(cfg.noise_bound)
}

/// Builds and initializes the network described by `cfg`. Initialization is
/// a pure function of `cfg.seed`.
pub fn build_model(cfg: &ModelConfig) -> Result<Model> {
    cfg.validate()?;
    let mut r = rng::stream(cfg.seed, 0);
    let h = cfg.hidden_dim;
    let mut layers = Vec::new();
    let mut quantum_index = 0u64;
    let mut quantum = |spec: CircuitSpec, r: &mut rng::Rng| -> Result<Layer> {
        let params = CircuitParams::random(&spec, r);
        quantum_index += 1;
        let noise_seed = rng::derive_seed(cfg.seed, quantum_index);
        Ok(Layer::Quantum(QuantumLayer::new(spec, params, noise_seed)?))
    };

    match cfg.family {
        Family::Qiren => {
            let mut width = cfg.d_in;
            for _ in 0..cfg.depth {
                layers.push(Layer::Linear(Linear::fan_in(width, h, &mut r)));
                if cfg.batchnorm {
                    layers.push(Layer::BatchNorm(BatchNorm::new(h)));
                }
                layers.push(quantum(circuit(cfg, h)?, &mut r)?);
                width = h;
            }
            layers.push(Layer::Linear(Linear::fan_in(width, cfg.d_out, &mut r)));
        }
        Family::Relu | Family::Tanh | Family::ReluRff => {
            let act = if cfg.family == Family::Tanh {
                Activation::Tanh
            } else {
                Activation::Relu
            };
            let (mut width, hidden) = if cfg.family == Family::ReluRff {
                let rff = RffLayer::gaussian(cfg.d_in, cfg.rff_features, cfg.rff_sigma, &mut r)?;
                let w = rff.out_dim();
                layers.push(Layer::Rff(rff));
                (w, cfg.depth)
            } else {
                (cfg.d_in, cfg.depth + 1)
            };
            for _ in 0..hidden {
                layers.push(Layer::Linear(Linear::fan_in(width, h, &mut r)));
                if cfg.batchnorm {
                    layers.push(Layer::BatchNorm(BatchNorm::new(h)));
                }
                layers.push(Layer::Activation(act));
                width = h;
            }
            layers.push(Layer::Linear(Linear::fan_in(width, cfg.d_out, &mut r)));
        }
        Family::Siren => {
            let sine = Activation::Sine { omega: cfg.omega0 };
            let hidden_bound = (6.0 / h as f64).sqrt() / cfg.omega0;
            layers.push(Layer::Linear(Linear::uniform(cfg.d_in, h, 1.0 / cfg.d_in as f64, &mut r)));
            layers.push(Layer::Activation(sine));
            for _ in 0..cfg.depth {
                layers.push(Layer::Linear(Linear::uniform(h, h, hidden_bound, &mut r)));
                layers.push(Layer::Activation(sine));
            }
            layers.push(Layer::Linear(Linear::uniform(h, cfg.d_out, hidden_bound, &mut r)));
        }
        Family::PureQuantum => {
            layers.push(Layer::Replicate(Replicate {
                d_in: cfg.d_in,
                d_out: cfg.qubits,
            }));
            layers.push(quantum(circuit(cfg, cfg.qubits)?.z_outputs(cfg.d_out)?, &mut r)?);
        }
    }
    Ok(Model {
        config: cfg.clone(),
        stack: LayerStack::new(cfg.d_in, layers)?,
    })
}
