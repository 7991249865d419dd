use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::data::{pixel_grid, Image, Normalization, SignalDataset};
use crate::error::{Error, Result};
use crate::models::Model;

/// Evaluates a 2-D model on the pixel centres of a grid `factor` times
/// denser than `rows × cols`.
pub fn superresolve(model: &Model, rows: usize, cols: usize, factor: usize) -> Result<SignalDataset> {
    if model.config.d_in != 2 {
        return Err(Error::Invalid(format!(
            "superresolution needs a 2-D model, this one takes {} input(s)",
            model.config.d_in
        )));
    }
    if factor == 0 || rows == 0 || cols == 0 {
        return Err(Error::Invalid(format!("factor {factor} on a {rows}×{cols} grid")));
    }
    let (r, c) = (rows * factor, cols * factor);
    let coords = pixel_grid(r, c);
    let values = model.predict(&coords)?;
    SignalDataset::new(
        coords,
        values,
        vec![r, c],
        Normalization {
            raw_min: 0.0,
            raw_max: 1.0,
            lo: 0.0,
            hi: 1.0,
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    Nearest,
    Bilinear,
}

impl fmt::Display for Interp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interp::Nearest => "nearest",
            Interp::Bilinear => "bilinear",
        })
    }
}

impl FromStr for Interp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" => Ok(Interp::Nearest),
            "bilinear" => Ok(Interp::Bilinear),
            other => Err(Error::Invalid(format!("unknown interpolation '{other}'"))),
        }
    }
}

/// Source-pixel coordinate of output pixel `k` when upsampling by `factor`,
/// with pixel centres aligned.
fn source_coord(k: usize, factor: usize) -> f64 {
    (k as f64 + 0.5) / factor as f64 - 0.5
}

/// Upsamples by an integer `factor`. Bilinear clamps at the borders.
pub fn interp_baseline(image: &Image, method: Interp, factor: usize) -> Result<Image> {
    if factor == 0 {
        return Err(Error::Invalid("factor must be at least 1".into()));
    }
    let (rows, cols) = (image.rows * factor, image.cols * factor);
    Ok(match method {
        Interp::Nearest => Image::from_fn(rows, cols, |r, c| {
            let sr = (source_coord(r, factor) + 0.5).floor().clamp(0.0, (image.rows - 1) as f64);
            let sc = (source_coord(c, factor) + 0.5).floor().clamp(0.0, (image.cols - 1) as f64);
            image.get(sr as usize, sc as usize)
        }),
        Interp::Bilinear => {
            let axis = |k: usize, n: usize| {
                let s = source_coord(k, factor).clamp(0.0, (n - 1) as f64);
                let i0 = (s.floor() as usize).min(n.saturating_sub(2));
                let i1 = (i0 + 1).min(n - 1);
                (i0, i1, s - i0 as f64)
            };
            Image::from_fn(rows, cols, |r, c| {
                let (r0, r1, tr) = axis(r, image.rows);
                let (c0, c1, tc) = axis(c, image.cols);
                let top = image.get(r0, c0) * (1.0 - tc) + image.get(r0, c1) * tc;
                let bottom = image.get(r1, c0) * (1.0 - tc) + image.get(r1, c1) * tc;
                top * (1.0 - tr) + bottom * tr
            })
        }
    })
}

pub fn image_mse(a: &Image, b: &Image) -> Result<f64> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Shape(format!(
            "{}×{} vs {}×{} images",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(a.pixels
        .iter()
        .zip(&b.pixels)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        / a.pixels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::smooth_image;

    #[test]
    fn nearest_replicates_blocks() {
        let img = Image::from_fn(2, 2, |r, c| (r * 2 + c) as f64);
        let up = interp_baseline(&img, Interp::Nearest, 2).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(up.get(r, c), img.get(r / 2, c / 2));
            }
        }
        assert_eq!(interp_baseline(&img, Interp::Bilinear, 1).unwrap(), img);
    }

    #[test]
    fn bilinear_reproduces_ramps_inside() {
        let n = 8;
        let ramp = |r: f64, c: f64| 0.1 + 0.03 * r - 0.02 * c;
        let img = Image::from_fn(n, n, |r, c| ramp(r as f64, c as f64));
        for f in [2, 3] {
            let up = interp_baseline(&img, Interp::Bilinear, f).unwrap();
            for r in 0..n * f {
                for c in 0..n * f {
                    let (sr, sc) = (source_coord(r, f), source_coord(c, f));
                    if (0.0..=(n - 1) as f64).contains(&sr) && (0.0..=(n - 1) as f64).contains(&sc) {
                        assert!((up.get(r, c) - ramp(sr, sc)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn bilinear_beats_nearest_on_smooth_image() {
        for seed in 0..5 {
            let low = smooth_image(32, seed);
            let truth = smooth_image(64, seed);
            let n = image_mse(&interp_baseline(&low, Interp::Nearest, 2).unwrap(), &truth).unwrap();
            let b = image_mse(&interp_baseline(&low, Interp::Bilinear, 2).unwrap(), &truth).unwrap();
            assert!(b <= n, "seed {seed}: {b} > {n}");
        }
    }
}
