use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::SignalDataset;
use crate::error::{Error, Result};
use crate::models::{build_model, memory_saving, Model, ModelConfig};
use crate::nn::{adam_step, mse_loss, AdamState, ParamGroup};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr_classical: f64,
    pub lr_quantum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            lr_classical: 5e-4,
            lr_quantum: 5e-3,
        }
    }
}

impl TrainConfig {
    /// Both groups at one learning rate.
    pub fn single_lr(epochs: usize, lr: f64) -> Self {
        Self {
            epochs,
            lr_classical: lr,
            lr_quantum: lr,
        }
    }

    fn validate(&self) -> Result<()> {
        for lr in [self.lr_classical, self.lr_quantum] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::Invalid(format!("learning rate {lr} must be positive")));
            }
        }
        Ok(())
    }
}

/// Outcome of one training run. Everything except `wall_time_secs` is a pure
/// function of the inputs; the wall time is left out of the JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    pub model: ModelConfig,
    pub train: TrainConfig,
    /// Training-mode loss at the start of each epoch.
    pub loss_curve: Vec<f64>,
    /// Evaluation-mode MSE on the whole dataset after training.
    pub final_mse: f64,
    pub params: usize,
    pub mem_saving: f64,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl TrainReport {
    /// Canonical JSON text.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_loss_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "epoch,loss")?;
        for (e, l) in self.loss_curve.iter().enumerate() {
            writeln!(out, "{e},{l}")?;
        }
        Ok(())
    }
}

fn check_dims(model: &Model, data: &SignalDataset) -> Result<()> {
    if data.d_in() != model.config.d_in || data.d_out() != model.config.d_out {
        return Err(Error::Shape(format!(
            "model maps {} → {} but the dataset is {} → {}",
            model.config.d_in,
            model.config.d_out,
            data.d_in(),
            data.d_out()
        )));
    }
    Ok(())
}

fn layer_of_param(model: &Model, index: usize) -> usize {
    let mut end = 0;
    for (i, l) in model.stack.layers().iter().enumerate() {
        end += l.num_params();
        if index < end {
            return i;
        }
    }
    model.stack.layers().len()
}

/// Full-batch Adam on MSE for `cfg.epochs` epochs.
pub fn train(model: &mut Model, data: &SignalDataset, cfg: &TrainConfig) -> Result<(TrainReport, AdamState)> {
    cfg.validate()?;
    check_dims(model, data)?;
    let start = Instant::now();
    let lr = model
        .stack
        .param_groups()
        .iter()
        .map(|g| match g {
            ParamGroup::Classical => cfg.lr_classical,
            ParamGroup::Quantum => cfg.lr_quantum,
        })
        .collect();
    let mut opt = AdamState::new(lr);
    let mut loss_curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (loss, grads) = model
            .stack
            .backprop(&data.coords, &data.values)
            .map_err(|e| match e {
                Error::Diverged { layer, detail, .. } => Error::Diverged { epoch, layer, detail },
                other => other,
            })?;
        if let Some(j) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                layer: layer_of_param(model, j),
                detail: "non-finite gradient".into(),
            });
        }
        if !loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                layer: model.stack.layers().len() - 1,
                detail: format!("loss is {loss}"),
            });
        }
        loss_curve.push(loss);
        let mut params = model.stack.params();
        adam_step(&mut opt, &mut params, &grads)?;
        model.stack.set_params(&params)?;
        if (epoch + 1) % 50 == 0 {
            log::debug!("seed {} epoch {} loss {loss:.6}", model.config.seed, epoch + 1);
        }
    }
    let pred = model.predict(&data.coords).map_err(|e| match e {
        Error::Diverged { layer, detail, .. } => Error::Diverged {
            epoch: cfg.epochs,
            layer,
            detail,
        },
        other => other,
    })?;
    let (final_mse, _) = mse_loss(&pred, &data.values)?;
    let params = model.num_params();
    Ok((
        TrainReport {
            seed: model.config.seed,
            model: model.config.clone(),
            train: cfg.clone(),
            loss_curve,
            final_mse,
            params,
            mem_saving: memory_saving(params, data.len())?,
            wall_time_secs: start.elapsed().as_secs_f64(),
        },
        opt,
    ))
}

/// One seed's finished run.
#[derive(Clone, Debug)]
pub struct SeedRun {
    pub model: Model,
    pub report: TrainReport,
    pub optimizer: AdamState,
}

/// Trains one model per seed (in parallel) and returns all runs, with the
/// index of the lowest final MSE.
pub fn train_seeds(
    base: &ModelConfig,
    data: &SignalDataset,
    cfg: &TrainConfig,
    seeds: &[u64],
) -> Result<(Vec<SeedRun>, usize)> {
    if seeds.is_empty() {
        return Err(Error::Invalid("at least one seed is required".into()));
    }
    let runs: Vec<SeedRun> = seeds
        .par_iter()
        .map(|&seed| {
            let mut model = build_model(&base.clone().seed(seed))?;
            let (report, optimizer) = train(&mut model, data, cfg)?;
            Ok(SeedRun {
                model,
                report,
                optimizer,
            })
        })
        .collect::<Result<_>>()?;
    let best = (0..runs.len())
        .min_by(|&a, &b| runs[a].report.final_mse.total_cmp(&runs[b].report.final_mse))
        .expect("non-empty");
    Ok((runs, best))
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
