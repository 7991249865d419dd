use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qiren::circuit::Entangler;
use qiren::models::{Family, ModelConfig};
use qiren::tasks::TrainConfig;

pub const SEED_ENV: &str = "QIREN_SEED";

/// Quantum layers train at this multiple of the classical learning rate
/// unless set explicitly.
pub const QUANTUM_LR_RATIO: f64 = 10.0;

/// Every run setting that may come from a config file or the command line.
/// Unset fields fall through to the next source.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_quantum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reuploads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entangler: Option<Entangler>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batchnorm: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top; family, data, epochs, seeds, out, lr, lr_quantum, hidden_dim, depth, qubits,
            reuploads, blocks, entangler, noise, batchnorm)
    }

    pub fn data(&self) -> Result<&str> {
        match &self.data {
            Some(d) => Ok(d),
            None => bail!("no dataset given (use --data or a config file)"),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| vec![env_seed().unwrap_or(0)])
    }

    pub fn model_config(&self, d_in: usize, d_out: usize) -> Result<ModelConfig> {
        let mut cfg = ModelConfig::new(self.family.unwrap_or(Family::Qiren), d_in, d_out);
        if let Some(v) = self.hidden_dim {
            cfg.hidden_dim = v;
        }
        if let Some(v) = self.qubits {
            cfg.qubits = v;
            // the circuit width follows the hidden width when only one is given
            if self.hidden_dim.is_none() && cfg.family == Family::Qiren {
                cfg.hidden_dim = v;
            }
        }
        if let Some(v) = self.depth {
            cfg.depth = v;
        }
        if let Some(v) = self.reuploads {
            cfg.reuploads = v;
        }
        if let Some(v) = self.blocks {
            cfg.blocks = v;
        }
        if let Some(v) = self.entangler {
            cfg.entangler = v;
        }
        if let Some(v) = self.noise {
            cfg.noise_bound = v;
        }
        if let Some(v) = self.batchnorm {
            cfg.batchnorm = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn train_config(&self) -> TrainConfig {
        let d = TrainConfig::default();
        let lr_classical = self.lr.unwrap_or(d.lr_classical);
        TrainConfig {
            epochs: self.epochs.unwrap_or(d.epochs),
            lr_classical,
            lr_quantum: self.lr_quantum.unwrap_or(match self.lr {
                Some(lr) => lr * QUANTUM_LR_RATIO,
                None => d.lr_quantum,
            }),
        }
    }
}

pub fn env_seed() -> Option<u64> {
    let raw = std::env::var(SEED_ENV).ok()?;
    match raw.trim().parse() {
        Ok(s) => Some(s),
        Err(_) => {
            log::warn!("ignoring {SEED_ENV}={raw:?}: not an unsigned integer");
            None
        }
    }
}
