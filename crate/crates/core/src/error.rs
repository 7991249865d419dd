use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("gate {kind} expects {expected} {what}, got {got}")]
    Arity {
        kind: &'static str,
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("gate targets must be distinct, got {0:?}")]
    DuplicateTargets(Vec<usize>),

    #[error("register of {0} qubits is too large for dense construction")]
    RegisterTooLarge(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension mismatch at layer {layer}: {detail}")]
    LayerDim { layer: usize, detail: String },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("gradient requested for a noisy circuit (noise bound {0})")]
    NoisyGradient(f64),

    #[error("training diverged at epoch {epoch}, layer {layer}: {detail}")]
    Diverged {
        epoch: usize,
        layer: usize,
        detail: String,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("unsupported input format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),
}
