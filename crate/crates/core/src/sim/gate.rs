use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 2×2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
pub const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
pub const PAULI_Y: Mat2 = [[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]];
pub const PAULI_Z: Mat2 = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];
pub const PROJ_0: Mat2 = [[ONE, ZERO], [ZERO, ZERO]];
pub const PROJ_1: Mat2 = [[ZERO, ZERO], [ZERO, ONE]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Rx,
    Ry,
    Rz,
    /// General rotation `RZ(φ)·RY(θ)·RZ(ω)` with parameters `[φ, θ, ω]`.
    Rot,
    Cnot,
    Cz,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Rot,
        GateKind::Cnot,
        GateKind::Cz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Rot => "Rot",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
        }
    }

    pub fn num_targets(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Rot => 3,
            _ => 0,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A gate bound to register positions. For `Cnot` the first target is the control.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    params: Vec<f64>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if targets.len() != kind.num_targets() {
            return Err(Error::Arity {
                kind: kind.name(),
                what: "targets",
                expected: kind.num_targets(),
                got: targets.len(),
            });
        }
        if params.len() != kind.num_params() {
            return Err(Error::Arity {
                kind: kind.name(),
                what: "parameters",
                expected: kind.num_params(),
                got: params.len(),
            });
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::DuplicateTargets(targets));
        }
        Ok(Self {
            kind,
            targets,
            params,
        })
    }

    pub fn h(q: usize) -> Self {
        Self::fixed(GateKind::H, vec![q], vec![])
    }
    pub fn x(q: usize) -> Self {
        Self::fixed(GateKind::X, vec![q], vec![])
    }
    pub fn y(q: usize) -> Self {
        Self::fixed(GateKind::Y, vec![q], vec![])
    }
    pub fn z(q: usize) -> Self {
        Self::fixed(GateKind::Z, vec![q], vec![])
    }
    pub fn rx(q: usize, theta: f64) -> Self {
        Self::fixed(GateKind::Rx, vec![q], vec![theta])
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Self::fixed(GateKind::Ry, vec![q], vec![theta])
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Self::fixed(GateKind::Rz, vec![q], vec![theta])
    }
    pub fn rot(q: usize, phi: f64, theta: f64, omega: f64) -> Self {
        Self::fixed(GateKind::Rot, vec![q], vec![phi, theta, omega])
    }

    /// # Panics
    /// If `control == target`.
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target], vec![]).expect("distinct qubits")
    }

    /// # Panics
    /// If `a == b`.
    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, vec![a, b], vec![]).expect("distinct qubits")
    }

    fn fixed(kind: GateKind, targets: Vec<usize>, params: Vec<f64>) -> Self {
        Self {
            kind,
            targets,
            params,
        }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Single-qubit unitary for one-target gates; for controlled gates, the
    /// operator applied to the target when the control is set.
    pub fn local_matrix(&self) -> Mat2 {
        let p = &self.params;
        match self.kind {
            GateKind::H => {
                let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[s, s], [s, -s]]
            }
            GateKind::X | GateKind::Cnot => PAULI_X,
            GateKind::Y => PAULI_Y,
            GateKind::Z | GateKind::Cz => PAULI_Z,
            GateKind::Rx => rx_matrix(p[0]),
            GateKind::Ry => ry_matrix(p[0]),
            GateKind::Rz => rz_matrix(p[0]),
            GateKind::Rot => rot_matrix(p[0], p[1], p[2]),
        }
    }

    /// Full unitary on the gate's own targets (2×2 or 4×4), first target as
    /// the most significant bit. Row-major.
    pub fn unitary(&self) -> Vec<Vec<Complex64>> {
        match self.kind.num_targets() {
            1 => self.local_matrix().iter().map(|r| r.to_vec()).collect(),
            _ => {
                let u = self.local_matrix();
                let mut m = vec![vec![ZERO; 4]; 4];
                m[0][0] = ONE;
                m[1][1] = ONE;
                for r in 0..2 {
                    for c in 0..2 {
                        m[2 + r][2 + c] = u[r][c];
                    }
                }
                m
            }
        }
    }

    /// The operator as a sum of tensor-product terms, each a list of
    /// `(qubit, 2×2 factor)`; unlisted qubits carry the identity.
    pub fn kron_terms(&self) -> Vec<Vec<(usize, Mat2)>> {
        match self.kind.num_targets() {
            1 => vec![vec![(self.targets[0], self.local_matrix())]],
            _ => {
                let (c, t) = (self.targets[0], self.targets[1]);
                vec![
                    vec![(c, PROJ_0)],
                    vec![(c, PROJ_1), (t, self.local_matrix())],
                ]
            }
        }
    }
}

/// `exp(-iθX/2)`
pub fn rx_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

/// `exp(-iθY/2)`
pub fn ry_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// `exp(-iθZ/2)`
pub fn rz_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, -s), ZERO],
        [ZERO, Complex64::new(c, s)],
    ]
}

/// `RZ(φ)·RY(θ)·RZ(ω)`
pub fn rot_matrix(phi: f64, theta: f64, omega: f64) -> Mat2 {
    matmul2(&rz_matrix(phi), &matmul2(&ry_matrix(theta), &rz_matrix(omega)))
}

pub fn matmul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn adjoint2(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_dev_from_identity(m: &[Vec<Complex64>]) -> f64 {
        let n = m.len();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += m[k][r].conj() * m[k][c];
                }
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    fn sample_gate(kind: GateKind) -> Gate {
        let params: Vec<f64> = [0.3, -1.7, 2.9][..kind.num_params()].to_vec();
        let targets = (0..kind.num_targets()).collect();
        Gate::new(kind, targets, params).unwrap()
    }

    #[test]
    fn every_gate_kind_is_unitary() {
        for kind in GateKind::ALL {
            let dev = max_dev_from_identity(&sample_gate(kind).unitary());
            assert!(dev < 1e-12, "{kind}: U†U deviates by {dev}");
        }
    }

    #[test]
    fn rejects_wrong_arity() {
        assert!(matches!(
            Gate::new(GateKind::Rot, vec![0], vec![1.0]),
            Err(Error::Arity { .. })
        ));
        assert!(matches!(
            Gate::new(GateKind::Cnot, vec![0], vec![]),
            Err(Error::Arity { .. })
        ));
        assert!(matches!(
            Gate::new(GateKind::Cz, vec![1, 1], vec![]),
            Err(Error::DuplicateTargets(_))
        ));
    }

    #[test]
    fn rot_reduces_to_ry_when_z_angles_vanish() {
        let a = rot_matrix(0.0, 0.8, 0.0);
        let b = ry_matrix(0.8);
        for r in 0..2 {
            for c in 0..2 {
                assert!((a[r][c] - b[r][c]).norm() < 1e-15);
            }
        }
    }
}
