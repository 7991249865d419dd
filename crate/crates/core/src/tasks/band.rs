use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::band_split;

/// Decomposition of a residual's MSE into low- and high-frequency parts:
/// `total = low + high + cross`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandErrors {
    pub low: f64,
    pub high: f64,
    pub cross: f64,
    pub total: f64,
}

/// Splits `pred − target` at `cutoff_fraction` of Nyquist and reports the
/// mean squared energy of each band.
pub fn band_errors(pred: &[f64], target: &[f64], cutoff_fraction: f64) -> Result<BandErrors> {
    if pred.len() != target.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} targets",
            pred.len(),
            target.len()
        )));
    }
    let residual: Vec<f64> = pred.iter().zip(target).map(|(p, t)| p - t).collect();
    let (low, high) = band_split(&residual, cutoff_fraction)?;
    let n = residual.len() as f64;
    let mean = |f: &dyn Fn(usize) -> f64| (0..residual.len()).map(f).sum::<f64>() / n;
    Ok(BandErrors {
        low: mean(&|i| low[i] * low[i]),
        high: mean(&|i| high[i] * high[i]),
        cross: mean(&|i| 2.0 * low[i] * high[i]),
        total: mean(&|i| residual[i] * residual[i]),
    })
}
