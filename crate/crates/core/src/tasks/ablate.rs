use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::SignalDataset;
use super::train::{train, TrainConfig, TrainReport};
use crate::circuit::Entangler;
use crate::error::Result;
use crate::models::{build_model, Family, ModelConfig};

/// One point of the ablation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub family: Family,
    pub batchnorm: bool,
    pub reuploads: usize,
    pub noise: f64,
    pub entangler: Entangler,
}

impl AblationCell {
    pub fn apply(&self, base: &ModelConfig) -> ModelConfig {
        let mut cfg = if base.family == self.family {
            base.clone()
        } else {
            ModelConfig::new(self.family, base.d_in, base.d_out).seed(base.seed)
        };
        cfg.batchnorm = self.batchnorm && self.family != Family::PureQuantum;
        cfg.reuploads = self.reuploads;
        cfg.noise_bound = self.noise;
        cfg.entangler = self.entangler;
        cfg
    }
}

/// Values explored along each ablation axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationMatrix {
    pub families: Vec<Family>,
    pub batchnorm: Vec<bool>,
    pub reuploads: Vec<usize>,
    pub noise: Vec<f64>,
    pub entanglers: Vec<Entangler>,
}

impl Default for AblationMatrix {
    fn default() -> Self {
        Self {
            families: vec![Family::Qiren, Family::PureQuantum],
            batchnorm: vec![true, false],
            reuploads: vec![1, 2, 3, 4],
            noise: vec![0.0, 0.05, 0.10, 0.15],
            entanglers: vec![Entangler::Cnot, Entangler::Cz],
        }
    }
}

impl AblationMatrix {
    /// The first value of every axis.
    pub fn baseline(&self) -> AblationCell {
        AblationCell {
            family: self.families[0],
            batchnorm: self.batchnorm[0],
            reuploads: self.reuploads[0],
            noise: self.noise[0],
            entangler: self.entanglers[0],
        }
    }

    /// The baseline plus every single-axis variation of it.
    pub fn one_factor_at_a_time(&self) -> Vec<AblationCell> {
        let b = self.baseline();
        let mut cells = vec![b];
        cells.extend(self.families.iter().skip(1).map(|&family| AblationCell { family, ..b }));
        cells.extend(self.batchnorm.iter().skip(1).map(|&batchnorm| AblationCell { batchnorm, ..b }));
        cells.extend(self.reuploads.iter().skip(1).map(|&reuploads| AblationCell { reuploads, ..b }));
        cells.extend(self.noise.iter().skip(1).map(|&noise| AblationCell { noise, ..b }));
        cells.extend(self.entanglers.iter().skip(1).map(|&entangler| AblationCell { entangler, ..b }));
        dedup(cells)
    }

    /// Cartesian product of all axes (batch norm collapsed for families
    /// without it).
    pub fn full_grid(&self) -> Vec<AblationCell> {
        let mut cells = Vec::new();
        for &family in &self.families {
            for &batchnorm in &self.batchnorm {
                for &reuploads in &self.reuploads {
                    for &noise in &self.noise {
                        for &entangler in &self.entanglers {
                            cells.push(AblationCell {
                                family,
                                batchnorm: batchnorm && family != Family::PureQuantum,
                                reuploads,
                                noise,
                                entangler,
                            });
                        }
                    }
                }
            }
        }
        dedup(cells)
    }
}

fn dedup(cells: Vec<AblationCell>) -> Vec<AblationCell> {
    let mut out: Vec<AblationCell> = Vec::with_capacity(cells.len());
    for c in cells {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: AblationCell,
    pub seed: u64,
    /// Failures are kept per cell so the rest of the matrix still runs.
    pub outcome: std::result::Result<TrainReport, String>,
}

/// Trains every `(cell, seed)` pair in parallel.
pub fn ablate(
    cells: &[AblationCell],
    base: &ModelConfig,
    data: &SignalDataset,
    cfg: &TrainConfig,
    seeds: &[u64],
) -> Vec<CellResult> {
    let jobs: Vec<(AblationCell, u64)> = cells
        .iter()
        .flat_map(|&c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    jobs.par_iter()
        .map(|&(cell, seed)| {
            let outcome = build_model(&cell.apply(base).seed(seed))
                .and_then(|mut m| train(&mut m, data, cfg))
                .map(|(report, _)| report)
                .map_err(|e| e.to_string());
            if let Err(e) = &outcome {
                log::warn!("ablation cell {cell:?} seed {seed} failed: {e}");
            }
            CellResult { cell, seed, outcome }
        })
        .collect()
}

pub fn write_ablation_csv<W: Write>(results: &[CellResult], mut out: W) -> Result<()> {
    writeln!(out, "family,batchnorm,reuploads,noise,entangler,seed,params,final_mse,final_loss,error")?;
    for r in results {
        let c = &r.cell;
        write!(out, "{},{},{},{},{},{},", c.family, c.batchnorm, c.reuploads, c.noise, c.entangler, r.seed)?;
        match &r.outcome {
            Ok(rep) => writeln!(
                out,
                "{},{},{},",
                rep.params,
                rep.final_mse,
                rep.loss_curve.last().copied().unwrap_or(f64::NAN)
            )?,
            Err(e) => writeln!(out, ",,,\"{}\"", e.replace('"', "'"))?,
        }
    }
    Ok(())
}
