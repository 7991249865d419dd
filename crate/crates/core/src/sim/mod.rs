//! Statevector simulation of small qubit registers.

mod dense;
mod gate;
mod noise;
mod observable;
mod state;

pub use dense::{dense_matrix, dense_oracle_apply, MAX_DENSE_QUBITS};
pub use gate::{
    adjoint2, matmul2, rot_matrix, rx_matrix, ry_matrix, rz_matrix, Gate, GateKind, Mat2,
    IDENTITY, PAULI_X, PAULI_Y, PAULI_Z,
};
pub use noise::{inject_measurement_noise, sample_noise_angles};
pub use observable::{expectation, expectation_complex, Observable, Pauli};
pub use state::{apply_gate, StateVector, MAX_QUBITS};

pub(crate) use noise::apply_noise_angles;
pub(crate) use state::{
    apply_cnot, apply_cz, apply_mat2, apply_rx, apply_rz, im_inner_xyz, inner_z,
};
