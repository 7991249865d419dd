use num_complex::Complex64;

use super::gate::{Gate, GateKind, Mat2};
use crate::error::{Error, Result};

/// Largest register this simulator will allocate.
pub const MAX_QUBITS: usize = 26;

/// Pure state of an `n`-qubit register. Qubit 0 is the most significant bit
/// of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Invalid(format!(
                "register size must be in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(num_qubits)?;
        if index >= s.amps.len() {
            return Err(Error::Invalid(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps raw amplitudes. The length must be a power of two ≥ 2; the
    /// vector is taken as given (not renormalized).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        for &q in gate.targets() {
            self.check_qubit(q)?;
        }
        let t = gate.targets();
        let p = gate.params();
        match gate.kind() {
            GateKind::Rz => apply_rz(&mut self.amps, self.num_qubits, t[0], p[0]),
            GateKind::Ry => apply_ry(&mut self.amps, self.num_qubits, t[0], p[0]),
            GateKind::Cnot => apply_cnot(&mut self.amps, self.num_qubits, t[0], t[1]),
            GateKind::Cz => apply_cz(&mut self.amps, self.num_qubits, t[0], t[1]),
            _ => apply_mat2(&mut self.amps, self.num_qubits, t[0], &gate.local_matrix()),
        }
        Ok(())
    }
}

/// Functional form of [`StateVector::apply`].
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

#[inline]
fn bit(num_qubits: usize, q: usize) -> usize {
    1 << (num_qubits - 1 - q)
}

pub(crate) fn apply_mat2(amps: &mut [Complex64], n: usize, q: usize, m: &Mat2) {
    let stride = bit(n, q);
    for base in (0..amps.len()).step_by(2 * stride) {
        for i in base..base + stride {
            let a = amps[i];
            let b = amps[i + stride];
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[i + stride] = m[1][0] * a + m[1][1] * b;
        }
    }
}

pub(crate) fn apply_rz(amps: &mut [Complex64], n: usize, q: usize, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    let lo = Complex64::new(c, -s);
    let hi = Complex64::new(c, s);
    let stride = bit(n, q);
    for base in (0..amps.len()).step_by(2 * stride) {
        for i in base..base + stride {
            amps[i] *= lo;
            amps[i + stride] *= hi;
        }
    }
}

pub(crate) fn apply_ry(amps: &mut [Complex64], n: usize, q: usize, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    let stride = bit(n, q);
    for base in (0..amps.len()).step_by(2 * stride) {
        for i in base..base + stride {
            let a = amps[i];
            let b = amps[i + stride];
            amps[i] = a * c - b * s;
            amps[i + stride] = a * s + b * c;
        }
    }
}

pub(crate) fn apply_rx(amps: &mut [Complex64], n: usize, q: usize, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    let mis = Complex64::new(0.0, -s);
    let stride = bit(n, q);
    for base in (0..amps.len()).step_by(2 * stride) {
        for i in base..base + stride {
            let a = amps[i];
            let b = amps[i + stride];
            amps[i] = a * c + b * mis;
            amps[i + stride] = a * mis + b * c;
        }
    }
}

pub(crate) fn apply_cnot(amps: &mut [Complex64], n: usize, control: usize, target: usize) {
    let cb = bit(n, control);
    let tb = bit(n, target);
    for i in 0..amps.len() {
        if i & cb != 0 && i & tb == 0 {
            amps.swap(i, i | tb);
        }
    }
}

pub(crate) fn apply_cz(amps: &mut [Complex64], n: usize, a: usize, b: usize) {
    let mask = bit(n, a) | bit(n, b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

/// `⟨λ|Z_q|ψ⟩`
pub(crate) fn inner_z(lambda: &[Complex64], psi: &[Complex64], n: usize, q: usize) -> Complex64 {
    let stride = bit(n, q);
    let mut acc = Complex64::new(0.0, 0.0);
    for base in (0..psi.len()).step_by(2 * stride) {
        for i in base..base + stride {
            acc += lambda[i].conj() * psi[i] - lambda[i + stride].conj() * psi[i + stride];
        }
    }
    acc
}

/// Imaginary parts of `⟨λ|X_q|ψ⟩`, `⟨λ|Y_q|ψ⟩`, `⟨λ|Z_q|ψ⟩` in one pass.
pub(crate) fn im_inner_xyz(lambda: &[Complex64], psi: &[Complex64], n: usize, q: usize) -> [f64; 3] {
    let stride = bit(n, q);
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for base in (0..psi.len()).step_by(2 * stride) {
        for i in base..base + stride {
            let l0 = lambda[i].conj();
            let l1 = lambda[i + stride].conj();
            let (p0, p1) = (psi[i], psi[i + stride]);
            let a = l0 * p1;
            let b = l1 * p0;
            x += a.im + b.im;
            // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩, so ⟨λ|Y|ψ⟩ = i(l1·p0 − l0·p1)
            y += b.re - a.re;
            z += (l0 * p0).im - (l1 * p1).im;
        }
    }
    [x, y, z]
}
