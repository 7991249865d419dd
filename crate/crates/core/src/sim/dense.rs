//! Brute-force reference: materialize a gate as a full `2^n × 2^n` matrix
//! from Kronecker products and multiply.

use num_complex::Complex64;

use super::gate::{Gate, Mat2, IDENTITY};
use super::state::StateVector;
use crate::error::{Error, Result};

pub const MAX_DENSE_QUBITS: usize = 10;

/// Dense `2^n × 2^n` matrix of `gate` acting on an `n`-qubit register.
pub fn dense_matrix(gate: &Gate, num_qubits: usize) -> Result<Vec<Vec<Complex64>>> {
    if num_qubits > MAX_DENSE_QUBITS {
        return Err(Error::RegisterTooLarge(num_qubits));
    }
    for &q in gate.targets() {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits,
            });
        }
    }
    let dim = 1 << num_qubits;
    let mut total = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for term in gate.kron_terms() {
        let factors: Vec<Mat2> = (0..num_qubits)
            .map(|q| {
                term.iter()
                    .find(|(t, _)| *t == q)
                    .map_or(IDENTITY, |(_, m)| *m)
            })
            .collect();
        let m = kron_all(&factors);
        for (row, mrow) in total.iter_mut().zip(&m) {
            for (v, x) in row.iter_mut().zip(mrow) {
                *v += x;
            }
        }
    }
    Ok(total)
}

/// `A_0 ⊗ A_1 ⊗ …`, leftmost factor on the most significant bit.
fn kron_all(factors: &[Mat2]) -> Vec<Vec<Complex64>> {
    let mut acc = vec![vec![Complex64::new(1.0, 0.0)]];
    for f in factors {
        let n = acc.len();
        let mut next = vec![vec![Complex64::new(0.0, 0.0); 2 * n]; 2 * n];
        for (r, arow) in acc.iter().enumerate() {
            for (c, a) in arow.iter().enumerate() {
                for fr in 0..2 {
                    for fc in 0..2 {
                        next[2 * r + fr][2 * c + fc] = a * f[fr][fc];
                    }
                }
            }
        }
        acc = next;
    }
    acc
}

/// Applies `gate` by dense matrix-vector multiplication.
pub fn dense_oracle_apply(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let m = dense_matrix(gate, state.num_qubits())?;
    let psi = state.amplitudes();
    let out = m
        .iter()
        .map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum())
        .collect();
    StateVector::from_amplitudes(out)
}
