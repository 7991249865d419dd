//! Fourier spectra: the frequency sets a re-uploading circuit can express,
//! DFT extraction from circuits and trained models, and band splitting.

use std::f64::consts::PI;
use std::io::Write;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::circuit::{circuit_forward_with_noise, CircuitParams, CircuitSpec};
use crate::error::{Error, Result};
use crate::models::Model;

/// Coefficients at or below this magnitude count as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

/// Default band-split cutoff, as a fraction of Nyquist.
pub const DEFAULT_CUTOFF: f64 = 0.25;

/// Enumerated grids larger than this are refused.
const MAX_GRID_POINTS: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencySpectrum {
    /// Sorted, duplicate-free frequency vectors.
    pub frequencies: Vec<Vec<f64>>,
    pub coefficients: Option<Vec<Complex64>>,
}

impl FrequencySpectrum {
    fn from_scalars(values: impl IntoIterator<Item = f64>) -> Self {
        Self {
            frequencies: dedup_sorted(values).into_iter().map(|v| vec![v]).collect(),
            coefficients: None,
        }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// One-dimensional frequencies, if this is a 1-D spectrum.
    pub fn scalars(&self) -> Option<Vec<f64>> {
        self.frequencies
            .iter()
            .map(|f| (f.len() == 1).then(|| f[0]))
            .collect()
    }

    /// Entries whose coefficient magnitude exceeds `threshold`.
    pub fn support(&self, threshold: f64) -> Self {
        match &self.coefficients {
            None => self.clone(),
            Some(c) => {
                let (frequencies, coefficients) = self
                    .frequencies
                    .iter()
                    .zip(c)
                    .filter(|(_, c)| c.norm() > threshold)
                    .map(|(f, c)| (f.clone(), *c))
                    .unzip();
                Self {
                    frequencies,
                    coefficients: Some(coefficients),
                }
            }
        }
    }

    /// Coefficient at a 1-D frequency, if present.
    pub fn coefficient(&self, frequency: f64) -> Option<Complex64> {
        let c = self.coefficients.as_ref()?;
        self.frequencies
            .iter()
            .position(|f| f.len() == 1 && (f[0] - frequency).abs() < 1e-9)
            .map(|i| c[i])
    }

    /// `frequency,magnitude[,real,imag]`, one row per entry.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let with_parts = self.coefficients.is_some();
        writeln!(out, "frequency,magnitude{}", if with_parts { ",real,imag" } else { "" })?;
        for (i, f) in self.frequencies.iter().enumerate() {
            let freq = f.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
            match &self.coefficients {
                Some(c) => writeln!(out, "{freq},{},{},{}", c[i].norm(), c[i].re, c[i].im)?,
                None => writeln!(out, "{freq},1")?,
            }
        }
        Ok(())
    }
}

fn dedup_sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    v
}

/// Per-axis frequencies of plain encoding: `{−dL, …, dL}`.
pub fn predicted_axis_spectrum(d: usize, reuploads: usize) -> Result<Vec<i64>> {
    if d == 0 || reuploads == 0 {
        return Err(Error::Invalid(format!(
            "spectrum needs d ≥ 1 and L ≥ 1 (got d={d}, L={reuploads})"
        )));
    }
    let m = (d * reuploads) as i64;
    Ok((-m..=m).collect())
}

/// `{−dL, …, dL}^{d_h}`, enumerated lexicographically.
pub fn predicted_spectrum_plain(d: usize, d_h: usize, reuploads: usize) -> Result<FrequencySpectrum> {
    let axis = predicted_axis_spectrum(d, reuploads)?;
    if d_h == 0 {
        return Err(Error::Invalid("spectrum needs d_h ≥ 1".into()));
    }
    let size = (axis.len() as u32)
        .checked_pow(d_h as u32)
        .map(|s| s as usize)
        .filter(|&s| s <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::Invalid(format!(
                "{}^{d_h} frequency vectors is too many to enumerate; use predicted_axis_spectrum",
                axis.len()
            ))
        })?;
    let mut frequencies = Vec::with_capacity(size);
    for mut idx in 0..size {
        let mut v = vec![0.0; d_h];
        for slot in v.iter_mut().rev() {
            *slot = axis[idx % axis.len()] as f64;
            idx /= axis.len();
        }
        frequencies.push(v);
    }
    Ok(FrequencySpectrum {
        frequencies,
        coefficients: None,
    })
}

/// `Ω⁽ᵏ⁾ = {Ω⁽ᵏ⁻¹⁾ − w_k, Ω⁽ᵏ⁻¹⁾, Ω⁽ᵏ⁻¹⁾ + w_k}` from `Ω⁽¹⁾ = {−w₁, 0, w₁}`:
/// the frequencies of one encoding pass with linear weights `w`.
pub fn spectrum_recursion_linear(weights: &[f64]) -> Result<FrequencySpectrum> {
    spectrum_recursion_linear_uploads(weights, 1)
}

/// The single-pass spectrum summed with itself `reuploads` times.
pub fn spectrum_recursion_linear_uploads(weights: &[f64], reuploads: usize) -> Result<FrequencySpectrum> {
    if weights.is_empty() || reuploads == 0 {
        return Err(Error::Invalid("need at least one weight and one upload".into()));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("encoding weight".into()));
    }
    let mut omega = vec![0.0];
    for &w in weights {
        omega = dedup_sorted(omega.iter().flat_map(|&o| [o - w, o, o + w]));
    }
    let single = omega.clone();
    let mut total = vec![0.0];
    for _ in 0..reuploads {
        total = dedup_sorted(total.iter().flat_map(|&t| single.iter().map(move |&s| t + s)));
    }
    Ok(FrequencySpectrum::from_scalars(total))
}

/// `{Σ_k s_k w_k : s ∈ {−1, 0, 1}^d}` by direct enumeration of all `3^d`
/// sign patterns.
pub fn enumerate_linear_spectrum(weights: &[f64]) -> FrequencySpectrum {
    let d = weights.len() as u32;
    FrequencySpectrum::from_scalars((0..3usize.pow(d)).map(|mut code| {
        weights
            .iter()
            .map(|&w| {
                let s = (code % 3) as f64 - 1.0;
                code /= 3;
                s * w
            })
            .sum::<f64>()
    }))
}

/// `w_k > 2·Σ_{j<k} |w_j|` for each `k` (always true at `k = 1`). All true
/// guarantees the full `3^d` frequencies.
pub fn check_nondegeneracy(weights: &[f64]) -> Vec<bool> {
    let mut prefix = 0.0;
    weights
        .iter()
        .map(|w| {
            let ok = w.abs() > 2.0 * prefix;
            prefix += w.abs();
            ok
        })
        .collect()
}

/// Two-sided DFT `c_n = (1/N) Σ_j f(h_j) e^{−i n h_j}` of circuit output
/// `output` along input `axis`, sampled at `h_j = 2πj/N` with the other
/// inputs held at `base`. Returns every bin `n ∈ [−⌈N/2⌉+1, ⌊N/2⌋]`.
pub fn circuit_dft(
    spec: &CircuitSpec,
    params: &CircuitParams,
    axis: usize,
    output: usize,
    base: &[f64],
    grid_size: usize,
) -> Result<FrequencySpectrum> {
    if spec.noise_bound() > 0.0 {
        return Err(Error::Invalid("spectrum extraction needs a noiseless circuit".into()));
    }
    if axis >= spec.num_features() || output >= spec.num_outputs() || base.len() != spec.num_features() {
        return Err(Error::Shape(format!(
            "axis {axis}, output {output}, base of length {} on a circuit with {} inputs and {} outputs",
            base.len(),
            spec.num_features(),
            spec.num_outputs()
        )));
    }
    let max = spec.qubits_per_feature() * spec.reuploads();
    if grid_size <= 2 * max {
        return Err(Error::Invalid(format!(
            "grid of {grid_size} points aliases frequencies up to {max}; need more than {}",
            2 * max
        )));
    }
    let mut h = base.to_vec();
    let mut buf: Vec<Complex64> = (0..grid_size)
        .map(|j| {
            h[axis] = 2.0 * PI * j as f64 / grid_size as f64;
            let y = circuit_forward_with_noise(spec, params, &h, None)?[output];
            Ok(Complex64::new(y, 0.0))
        })
        .collect::<Result<_>>()?;
    FftPlanner::new().plan_fft_forward(grid_size).process(&mut buf);
    let n = grid_size as i64;
    let bins: Vec<i64> = (-(n - 1) / 2..=n / 2).collect();
    let coefficients = bins
        .iter()
        .map(|&k| buf[k.rem_euclid(n) as usize] / grid_size as f64)
        .collect();
    Ok(FrequencySpectrum {
        frequencies: bins.iter().map(|&k| vec![k as f64]).collect(),
        coefficients: Some(coefficients),
    })
}

/// Frequencies of [`circuit_dft`] with magnitude above [`SUPPORT_THRESHOLD`].
pub fn extract_circuit_spectrum(
    spec: &CircuitSpec,
    params: &CircuitParams,
    axis: usize,
    output: usize,
    base: &[f64],
    grid_size: usize,
) -> Result<FrequencySpectrum> {
    Ok(circuit_dft(spec, params, axis, output, base, grid_size)?.support(SUPPORT_THRESHOLD))
}

/// Sum of `|c_n|²` over bins with `|n| > max_frequency`.
pub fn out_of_band_mass(spectrum: &FrequencySpectrum, max_frequency: f64) -> f64 {
    let Some(c) = &spectrum.coefficients else {
        return 0.0;
    };
    spectrum
        .frequencies
        .iter()
        .zip(c)
        .filter(|(f, _)| f.iter().any(|v| v.abs() > max_frequency + 1e-9))
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

/// One-sided DFT of a real signal: bins `0..=N/2`, coefficient `X_k / N`.
pub fn signal_spectrum(values: &[f64]) -> Result<FrequencySpectrum> {
    if values.is_empty() {
        return Err(Error::Shape("empty signal".into()));
    }
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(FrequencySpectrum {
        frequencies: (0..=n / 2).map(|k| vec![k as f64]).collect(),
        coefficients: Some(buf[..=n / 2].iter().map(|c| c / n as f64).collect()),
    })
}

/// Spectrum of a 1-D model's predictions over `coords` (one column, sorted,
/// uniformly spaced).
pub fn model_output_spectrum(model: &Model, coords: &Array2<f64>) -> Result<FrequencySpectrum> {
    if coords.ncols() != 1 {
        return Err(Error::Shape(format!(
            "spectrum needs 1-D coordinates, got {} columns",
            coords.ncols()
        )));
    }
    check_uniform(coords.column(0).as_slice().unwrap_or(&coords.column(0).to_vec()))?;
    let pred = model.predict(coords)?;
    signal_spectrum(&pred.column(0).to_vec())
}

fn check_uniform(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Ok(());
    }
    let step = x[1] - x[0];
    let tol = 1e-9 * (1.0 + step.abs());
    if !(step > 0.0) || x.windows(2).any(|w| (w[1] - w[0] - step).abs() > tol) {
        return Err(Error::Invalid("coordinates are not a uniform increasing grid".into()));
    }
    Ok(())
}

/// Ideal DFT partition: bins with `|k| ≤ cutoff · N/2` form `low`, the rest
/// `high`. `low + high` reconstructs the signal.
pub fn band_split(signal: &[f64], cutoff_fraction: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = signal.len();
    if n < 4 {
        return Err(Error::Invalid(format!("band split needs at least 4 samples, got {n}")));
    }
    if !(cutoff_fraction > 0.0 && cutoff_fraction < 1.0) {
        return Err(Error::Invalid(format!("cutoff fraction {cutoff_fraction} not in (0, 1)")));
    }
    let mut planner = FftPlanner::new();
    let mut spec: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);
    let limit = cutoff_fraction * n as f64 / 2.0;
    let mut low = vec![Complex64::new(0.0, 0.0); n];
    for (k, (l, s)) in low.iter_mut().zip(&spec).enumerate() {
        if k.min(n - k) as f64 <= limit {
            *l = *s;
        }
    }
    planner.plan_fft_inverse(n).process(&mut low);
    let low: Vec<f64> = low.iter().map(|c| c.re / n as f64).collect();
    let high = signal.iter().zip(&low).map(|(s, l)| s - l).collect();
    Ok((low, high))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use rand::Rng;

    use super::*;
    use crate::rng;

    fn ints(s: &FrequencySpectrum) -> Vec<i64> {
        s.scalars().unwrap().iter().map(|v| v.round() as i64).collect()
    }

    #[test]
    fn plain_spectrum_sizes() {
        assert_eq!(predicted_axis_spectrum(1, 3).unwrap(), (-3..=3).collect::<Vec<_>>());
        assert_eq!(predicted_axis_spectrum(2, 1).unwrap().len(), 5);
        assert_eq!(predicted_axis_spectrum(1, 1).unwrap(), vec![-1, 0, 1]);
        assert!(predicted_axis_spectrum(1, 0).is_err());
        let grid = predicted_spectrum_plain(1, 2, 1).unwrap();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid.frequencies[0], vec![-1.0, -1.0]);
        assert!(predicted_spectrum_plain(1, 6, 3).unwrap().len() == 7usize.pow(6));
        assert!(predicted_spectrum_plain(3, 16, 3).is_err());
    }

    #[test]
    fn recursion_examples() {
        assert_eq!(ints(&spectrum_recursion_linear(&[1.0, 1.0]).unwrap()), vec![-2, -1, 0, 1, 2]);
        assert_eq!(ints(&spectrum_recursion_linear(&[1.0, 3.0]).unwrap()), (-4..=4).collect::<Vec<_>>());
        assert_eq!(spectrum_recursion_linear(&[1.0, 3.0, 9.0]).unwrap().len(), 27);
        assert_eq!(spectrum_recursion_linear(&[1.0, 2.5]).unwrap().len(), 9);
        assert_eq!(spectrum_recursion_linear_uploads(&[1.0, 3.0], 3).unwrap().len(), 8 * 3 + 1);
    }

    #[test]
    fn nondegeneracy_flags() {
        assert_eq!(check_nondegeneracy(&[1.0, 3.0, 9.0]), vec![true; 3]);
        assert_eq!(check_nondegeneracy(&[1.0, 1.0]), vec![true, false]);
        assert_eq!(check_nondegeneracy(&[1.0, 2.5]), vec![true, true]);
    }

    #[test]
    fn recursion_matches_enumeration_on_random_weights() {
        let mut r = rng::stream(2, 0);
        for d in 1..=5 {
            let w: Vec<f64> = (0..d).map(|_| r.random_range(1..4) as f64).collect();
            assert_eq!(spectrum_recursion_linear(&w).unwrap(), enumerate_linear_spectrum(&w));
        }
    }

    #[test]
    fn minus_cos_coefficients() {
        let spec = CircuitSpec::new(1, 2, 1).unwrap();
        let params = CircuitParams::from_vec(&spec, vec![0.0, FRAC_PI_2, 0.0, 0.0, FRAC_PI_2, 0.0]).unwrap();
        let full = circuit_dft(&spec, &params, 0, 0, &[0.0], 64).unwrap();
        for f in full.scalars().unwrap() {
            let c = full.coefficient(f).unwrap();
            if f.abs() == 1.0 {
                assert!((c - Complex64::new(-0.5, 0.0)).norm() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12, "bin {f}: {c}");
            }
        }
        let support = extract_circuit_spectrum(&spec, &params, 0, 0, &[0.0], 64).unwrap();
        assert_eq!(ints(&support), vec![-1, 1]);
    }

    #[test]
    fn zero_params_only_dc() {
        let spec = CircuitSpec::new(2, 3, 1).unwrap();
        let params = CircuitParams::zeros(&spec);
        let s = extract_circuit_spectrum(&spec, &params, 1, 0, &[0.3, 0.0], 64).unwrap();
        assert_eq!(ints(&s), vec![0]);
        assert!((s.coefficient(0.0).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aliasing_grid_rejected() {
        let spec = CircuitSpec::new(1, 3, 1).unwrap();
        let params = CircuitParams::zeros(&spec);
        assert!(circuit_dft(&spec, &params, 0, 0, &[0.0], 6).is_err());
        assert!(circuit_dft(&spec, &params, 0, 0, &[0.0], 7).is_ok());
    }

    #[test]
    fn conjugate_symmetry_of_real_output() {
        let spec = CircuitSpec::with_encoding(2, 2, 2, 1).unwrap();
        let params = CircuitParams::random(&spec, &mut rng::stream(4, 0));
        let s = circuit_dft(&spec, &params, 0, 1, &[0.0, 1.1], 64).unwrap();
        for f in 1..=8 {
            let a = s.coefficient(f as f64).unwrap();
            let b = s.coefficient(-f as f64).unwrap();
            assert!((a - b.conj()).norm() < 1e-10);
        }
        assert!(out_of_band_mass(&s, 4.0) < 1e-20);
    }

    #[test]
    fn band_split_properties() {
        let n = 128;
        let tone: Vec<f64> = (0..n).map(|i| (2.0 * PI * 3.0 * i as f64 / n as f64).sin()).collect();
        let (low, high) = band_split(&tone, 0.25).unwrap();
        assert!(high.iter().all(|v| v.abs() < 1e-10));
        assert!(low.iter().zip(&tone).all(|(a, b)| (a - b).abs() < 1e-10));

        let mut r = rng::stream(8, 0);
        let noise: Vec<f64> = (0..4096).map(|_| r.random_range(-1.0..1.0)).collect();
        let (low, high) = band_split(&noise, 0.5).unwrap();
        for i in 0..noise.len() {
            assert!((low[i] + high[i] - noise[i]).abs() < 1e-10);
        }
        let e = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let frac = e(&low) / e(&noise);
        assert!((frac - 0.5).abs() < 0.05, "{frac}");
        assert!(band_split(&noise[..3], 0.5).is_err());
        assert!(band_split(&noise, 1.0).is_err());
    }

    #[test]
    fn signal_spectrum_peaks() {
        let n = 256;
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                0.5 * (2.0 * PI * 3.0 * t).sin() + 0.5 * (2.0 * PI * 17.0 * t).sin()
            })
            .collect();
        let s = signal_spectrum(&y).unwrap();
        assert_eq!(s.len(), 129);
        let c = s.coefficients.as_ref().unwrap();
        let mut idx: Vec<usize> = (0..c.len()).collect();
        idx.sort_by(|a, b| c[*b].norm().total_cmp(&c[*a].norm()));
        let mut top = vec![idx[0], idx[1]];
        top.sort();
        assert_eq!(top, vec![3, 17]);
    }

    #[test]
    fn csv_header() {
        let s = signal_spectrum(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("frequency,magnitude,real,imag\n0,1,1,0\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
