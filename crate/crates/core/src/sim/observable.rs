use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Real-weighted sum of Pauli strings; Hermitian by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    num_qubits: usize,
    terms: Vec<(f64, Vec<Pauli>)>,
}

impl Observable {
    pub fn new(num_qubits: usize, terms: Vec<(f64, Vec<Pauli>)>) -> Result<Self> {
        if let Some((_, s)) = terms.iter().find(|(_, s)| s.len() != num_qubits) {
            return Err(Error::Shape(format!(
                "Pauli string of length {} on a {num_qubits}-qubit observable",
                s.len()
            )));
        }
        if terms.iter().any(|(c, _)| !c.is_finite()) {
            return Err(Error::NonFinite("observable coefficient".into()));
        }
        Ok(Self { num_qubits, terms })
    }

    /// Pauli Z on `qubit`, identity elsewhere.
    pub fn z(num_qubits: usize, qubit: usize) -> Result<Self> {
        Self::single(num_qubits, qubit, Pauli::Z)
    }

    pub fn single(num_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        if qubit >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                num_qubits,
            });
        }
        let mut s = vec![Pauli::I; num_qubits];
        s[qubit] = pauli;
        Self::new(num_qubits, vec![(1.0, s)])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(f64, Vec<Pauli>)] {
        &self.terms
    }

    /// `Σ|c|`, an upper bound on `|⟨O⟩|`.
    pub fn bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// Real linear combination of observables on the same register.
    pub fn combine(parts: &[(f64, &Observable)]) -> Result<Self> {
        let n = parts.first().map_or(0, |(_, o)| o.num_qubits);
        let mut terms = Vec::new();
        for (w, o) in parts {
            if o.num_qubits != n {
                return Err(Error::Shape("observables act on different registers".into()));
            }
            terms.extend(o.terms.iter().map(|(c, s)| (w * c, s.clone())));
        }
        Self::new(n, terms)
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::Shape(format!(
                "observable on {} qubits, state has {}",
                self.num_qubits,
                state.num_qubits()
            )));
        }
        Ok(())
    }

    /// `O|ψ⟩`
    pub fn apply(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        self.check(state)?;
        let psi = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (c, s) in &self.terms {
            let (flip, mask_z, mask_y) = masks(s);
            let ny = mask_y.count_ones();
            for (i, &amp) in psi.iter().enumerate() {
                out[i ^ flip] += amp * (*c * phase(i, mask_z, mask_y, ny));
            }
        }
        Ok(out)
    }
}

/// `⟨ψ|O|ψ⟩`, real for Hermitian `O`.
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    Ok(expectation_complex(state, obs)?.re)
}

/// Full complex value of `⟨ψ|O|ψ⟩`; the imaginary part is rounding noise.
pub fn expectation_complex(state: &StateVector, obs: &Observable) -> Result<Complex64> {
    obs.check(state)?;
    let psi = state.amplitudes();
    let mut total = Complex64::new(0.0, 0.0);
    for (c, s) in &obs.terms {
        let (flip, mask_z, mask_y) = masks(s);
        let ny = mask_y.count_ones();
        let mut acc = Complex64::new(0.0, 0.0);
        if flip == 0 {
            for (i, amp) in psi.iter().enumerate() {
                let sign = if (i & mask_z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += amp.norm_sqr() * sign;
            }
        } else {
            for (i, &amp) in psi.iter().enumerate() {
                acc += psi[i ^ flip].conj() * amp * phase(i, mask_z, mask_y, ny);
            }
        }
        total += acc * *c;
    }
    Ok(total)
}

/// Bit masks (X|Y flips, Z|Y sign bits, Y bits) with qubit 0 as the MSB.
fn masks(s: &[Pauli]) -> (usize, usize, usize) {
    let n = s.len();
    let (mut flip, mut z, mut y) = (0, 0, 0);
    for (q, p) in s.iter().enumerate() {
        let b = 1 << (n - 1 - q);
        match p {
            Pauli::I => {}
            Pauli::X => flip |= b,
            Pauli::Y => {
                flip |= b;
                y |= b;
            }
            Pauli::Z => z |= b,
        }
    }
    (flip, z, y)
}

/// Phase of `P|i⟩ = phase · |i ⊕ flip⟩`. Y contributes `i` on |0⟩ and `−i`
/// on |1⟩, i.e. `i^{n_y}·(−1)^{#set Y bits}`.
fn phase(i: usize, mask_z: usize, mask_y: usize, ny: u32) -> Complex64 {
    let neg = ((i & mask_z).count_ones() + (i & mask_y).count_ones()) % 2 == 1;
    let base = match ny % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    if neg {
        -base
    } else {
        base
    }
}
