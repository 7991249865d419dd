use ndarray::Array2;

use crate::error::{Error, Result};

/// Mean squared error over all entries, with its gradient with respect to `pred`.
pub fn mse_loss(pred: &Array2<f64>, target: &Array2<f64>) -> Result<(f64, Array2<f64>)> {
    if pred.dim() != target.dim() {
        return Err(Error::Shape(format!(
            "prediction {:?} vs target {:?}",
            pred.dim(),
            target.dim()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Invalid("empty dataset".into()));
    }
    let n = pred.len() as f64;
    let diff = pred - target;
    let loss = diff.mapv(|d| d * d).sum() / n;
    Ok((loss, diff * (2.0 / n)))
}
