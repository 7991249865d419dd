use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Observable;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entangler {
    #[default]
    Cnot,
    Cz,
}

impl fmt::Display for Entangler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entangler::Cnot => "cnot",
            Entangler::Cz => "cz",
        })
    }
}

impl FromStr for Entangler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cnot" | "cnot_ring" => Ok(Entangler::Cnot),
            "cz" | "cz_ring" => Ok(Entangler::Cz),
            other => Err(Error::Invalid(format!("unknown entangler '{other}'"))),
        }
    }
}

/// A data re-uploading circuit: `L` repetitions of an encoding layer
/// (`RZ(h_f)` on every qubit assigned to feature `f`) followed by a parameter
/// layer of `K` blocks, each a `Rot` on every qubit and an entangler ring.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    num_features: usize,
    reuploads: usize,
    blocks: usize,
    entangler: Entangler,
    qubits_per_feature: usize,
    observables: Vec<Observable>,
    noise_bound: f64,
}

impl CircuitSpec {
    /// One qubit per feature, Z measured on every wire, CNOT ring, no noise.
    pub fn new(num_features: usize, reuploads: usize, blocks: usize) -> Result<Self> {
        Self::with_encoding(num_features, 1, reuploads, blocks)
    }

    /// `qubits_per_feature` copies of each feature's encoding, laid out
    /// feature-major (feature `f` owns qubits `f·d .. (f+1)·d`).
    pub fn with_encoding(
        num_features: usize,
        qubits_per_feature: usize,
        reuploads: usize,
        blocks: usize,
    ) -> Result<Self> {
        if num_features == 0 || qubits_per_feature == 0 || reuploads == 0 || blocks == 0 {
            return Err(Error::Invalid(format!(
                "circuit dimensions must be positive (features {num_features}, \
                 qubits/feature {qubits_per_feature}, reuploads {reuploads}, blocks {blocks})"
            )));
        }
        let nq = num_features * qubits_per_feature;
        if nq > crate::sim::MAX_QUBITS {
            return Err(Error::Invalid(format!("{nq} qubits exceeds the simulator limit")));
        }
        let observables = (0..nq).map(|q| Observable::z(nq, q)).collect::<Result<_>>()?;
        Ok(Self {
            num_features,
            reuploads,
            blocks,
            entangler: Entangler::Cnot,
            qubits_per_feature,
            observables,
            noise_bound: 0.0,
        })
    }

    /// Measures single-qubit Z on the first `d_f` wires.
    pub fn z_outputs(mut self, d_f: usize) -> Result<Self> {
        let nq = self.num_qubits();
        if d_f == 0 || d_f > nq {
            return Err(Error::Invalid(format!(
                "{d_f} Z outputs requested on {nq} qubits"
            )));
        }
        self.observables = (0..d_f).map(|q| Observable::z(nq, q)).collect::<Result<_>>()?;
        Ok(self)
    }

    pub fn observables_from(mut self, observables: Vec<Observable>) -> Result<Self> {
        let nq = self.num_qubits();
        if observables.is_empty() || observables.iter().any(|o| o.num_qubits() != nq) {
            return Err(Error::Shape(format!(
                "observables must be non-empty and act on {nq} qubits"
            )));
        }
        self.observables = observables;
        Ok(self)
    }

    pub fn entangler(mut self, entangler: Entangler) -> Self {
        self.entangler = entangler;
        self
    }

    pub fn noise(mut self, noise_bound: f64) -> Result<Self> {
        if !(noise_bound >= 0.0) || !noise_bound.is_finite() {
            return Err(Error::Invalid(format!("noise bound {noise_bound}")));
        }
        self.noise_bound = noise_bound;
        Ok(self)
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_qubits(&self) -> usize {
        self.num_features * self.qubits_per_feature
    }

    pub fn qubits_per_feature(&self) -> usize {
        self.qubits_per_feature
    }

    pub fn reuploads(&self) -> usize {
        self.reuploads
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn entangler_kind(&self) -> Entangler {
        self.entangler
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn num_outputs(&self) -> usize {
        self.observables.len()
    }

    pub fn noise_bound(&self) -> f64 {
        self.noise_bound
    }

    /// `L · K · qubits · 3`
    pub fn num_params(&self) -> usize {
        self.reuploads * self.blocks * self.num_qubits() * 3
    }

    pub fn feature_of_qubit(&self, q: usize) -> usize {
        q / self.qubits_per_feature
    }
}

/// Trainable angles laid out as `[L][K][qubit][φ, θ, ω]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitParams {
    angles: Vec<f64>,
}

impl CircuitParams {
    pub fn zeros(spec: &CircuitSpec) -> Self {
        Self {
            angles: vec![0.0; spec.num_params()],
        }
    }

    /// Uniform on `[-π, π]`.
    pub fn random<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R) -> Self {
        Self {
            angles: (0..spec.num_params())
                .map(|_| rng.random_range(-PI..=PI))
                .collect(),
        }
    }

    pub fn from_vec(spec: &CircuitSpec, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != spec.num_params() {
            return Err(Error::Shape(format!(
                "circuit expects {} angles, got {}",
                spec.num_params(),
                angles.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("circuit angle".into()));
        }
        Ok(Self { angles })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Flat offset of `(layer, block, qubit)`'s `φ`.
    pub fn index(spec: &CircuitSpec, layer: usize, block: usize, qubit: usize) -> usize {
        ((layer * spec.blocks + block) * spec.num_qubits() + qubit) * 3
    }
}
