use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::Entangler;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Qiren,
    Relu,
    Tanh,
    ReluRff,
    Siren,
    PureQuantum,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Qiren,
        Family::Relu,
        Family::Tanh,
        Family::ReluRff,
        Family::Siren,
        Family::PureQuantum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Qiren => "qiren",
            Family::Relu => "relu",
            Family::Tanh => "tanh",
            Family::ReluRff => "relu_rff",
            Family::Siren => "siren",
            Family::PureQuantum => "pure_quantum",
        }
    }

    pub fn is_quantum(self) -> bool {
        matches!(self, Family::Qiren | Family::PureQuantum)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| Error::Invalid(format!("unknown model family '{s}'")))
    }
}

/// Architecture of one model. Fields that a family does not use are ignored
/// by it; [`ModelConfig::new`] fills in that family's defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    pub d_in: usize,
    pub d_out: usize,
    pub hidden_dim: usize,
    /// Hybrid layers for QIREN, hidden layers for the MLP families.
    pub depth: usize,
    pub qubits: usize,
    pub reuploads: usize,
    pub blocks: usize,
    pub entangler: Entangler,
    pub noise_bound: f64,
    pub batchnorm: bool,
    pub rff_features: usize,
    pub rff_sigma: f64,
    pub omega0: f64,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(family: Family, d_in: usize, d_out: usize) -> Self {
        let base = Self {
            family,
            d_in,
            d_out,
            hidden_dim: 10,
            depth: 6,
            qubits: 8,
            reuploads: 3,
            blocks: 2,
            entangler: Entangler::Cnot,
            noise_bound: 0.0,
            batchnorm: true,
            rff_features: 5,
            rff_sigma: crate::nn::RffLayer::DEFAULT_SIGMA,
            omega0: 30.0,
            seed: 0,
        };
        match family {
            Family::Qiren => Self {
                hidden_dim: 8,
                depth: 3,
                ..base
            },
            Family::Siren => Self {
                batchnorm: false,
                ..base
            },
            Family::PureQuantum => Self {
                hidden_dim: 8,
                depth: 0,
                blocks: 1,
                batchnorm: false,
                ..base
            },
            _ => base,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Invalid(msg));
        if self.d_in == 0 || self.d_out == 0 {
            return bad(format!("d_in and d_out must be positive ({}, {})", self.d_in, self.d_out));
        }
        if !(self.noise_bound >= 0.0 && self.noise_bound.is_finite()) {
            return bad(format!("noise bound {}", self.noise_bound));
        }
        match self.family {
            Family::Qiren => {
                if self.depth == 0 || self.hidden_dim == 0 {
                    return bad("qiren needs at least one hybrid layer of positive width".into());
                }
                if self.qubits != self.hidden_dim {
                    return bad(format!(
                        "qiren circuits need one qubit per hidden unit (qubits {}, hidden_dim {})",
                        self.qubits, self.hidden_dim
                    ));
                }
            }
            Family::PureQuantum => {
                if self.qubits < self.d_in || self.qubits < self.d_out {
                    return bad(format!(
                        "pure_quantum needs at least max(d_in, d_out) qubits, got {}",
                        self.qubits
                    ));
                }
            }
            Family::ReluRff => {
                if self.rff_features == 0 || !(self.rff_sigma > 0.0) {
                    return bad("relu_rff needs rff_features > 0 and rff_sigma > 0".into());
                }
            }
            Family::Siren if !(self.omega0 > 0.0) => return bad("siren needs omega0 > 0".into()),
            _ => {}
        }
        if self.family.is_quantum() {
            if self.qubits == 0 || self.reuploads == 0 || self.blocks == 0 {
                return bad("circuit dimensions must be positive".into());
            }
            if self.qubits > crate::sim::MAX_QUBITS {
                return bad(format!("{} qubits exceeds the simulator limit", self.qubits));
            }
        } else if self.hidden_dim == 0 {
            return bad("hidden_dim must be positive".into());
        }
        Ok(())
    }

    /// Closed-form trainable parameter count.
    pub fn count_params(&self) -> Result<usize> {
        self.validate()?;
        let lin = |i: usize, o: usize| i * o + o;
        let bn = |d: usize| if self.batchnorm { 2 * d } else { 0 };
        let h = self.hidden_dim;
        let circuit = self.reuploads * self.blocks * self.qubits * 3;
        Ok(match self.family {
            Family::Qiren => {
                lin(self.d_in, h)
                    + (self.depth - 1) * lin(h, h)
                    + self.depth * (bn(h) + circuit)
                    + lin(h, self.d_out)
            }
            Family::Relu | Family::Tanh => {
                lin(self.d_in, h) + bn(h) + self.depth * (lin(h, h) + bn(h)) + lin(h, self.d_out)
            }
            Family::ReluRff => {
                lin(2 * self.rff_features, h) + bn(h) + (self.depth - 1) * (lin(h, h) + bn(h)) + lin(h, self.d_out)
            }
            Family::Siren => lin(self.d_in, h) + self.depth * lin(h, h) + lin(h, self.d_out),
            Family::PureQuantum => circuit,
        })
    }
}

/// `1 − params / dataset_size`, as a fraction. Negative when the model is
/// larger than the data.
pub fn memory_saving(params: usize, dataset_size: usize) -> Result<f64> {
    if dataset_size == 0 {
        return Err(Error::Invalid("dataset size must be positive".into()));
    }
    let saving = 1.0 - params as f64 / dataset_size as f64;
    if saving < 0.0 {
        log::warn!("model has more parameters ({params}) than data points ({dataset_size})");
    }
    Ok(saving)
}
