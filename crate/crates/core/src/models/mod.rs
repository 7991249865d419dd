//! Model families, parameter accounting and checkpoints.

mod build;
mod checkpoint;
mod config;

pub use build::{build_model, Model};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, TrainingMeta, FORMAT_VERSION, MAGIC};
pub use config::{memory_saving, Family, ModelConfig};

/// Trainable parameter count of `cfg` without building it.
pub fn count_params(cfg: &ModelConfig) -> crate::Result<usize> {
    cfg.count_params()
}
