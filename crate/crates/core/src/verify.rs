//! Self-check suite behind `qiren verify`: gradient, spectrum, simulator and
//! parameter-count oracles, each reduced to a pass/fail row.

use std::f64::consts::TAU;

use ndarray::Array2;
use rand::Rng;
use serde::Serialize;

use crate::circuit::{
    circuit_forward_with_noise, circuit_gradient_adjoint, circuit_gradient_paramshift, CircuitParams, CircuitSpec,
    GradWrt,
};
use crate::error::Result;
use crate::models::{build_model, memory_saving, Family, ModelConfig};
use crate::nn::RffLayer;
use crate::rng::stream;
use crate::sim::{dense_oracle_apply, Gate, GateKind, StateVector};
use crate::spectrum::{
    circuit_dft, enumerate_linear_spectrum, out_of_band_mass, spectrum_recursion_linear,
};
use crate::tasks::{image_mse, interp_baseline, smooth_image, superresolve, Interp};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

/// Runs every check. `seeds` controls how many random cases the sampled
/// checks draw.
pub fn run_all(seeds: u64) -> Vec<Check> {
    vec![
        Check::from_result("parameter counts", param_counts()),
        Check::from_result("fourier exactness", fourier_exactness(seeds)),
        Check::from_result("spectrum expansion", spectrum_expansion()),
        Check::from_result("gradient oracles", gradient_oracles(seeds)),
        Check::from_result("model gradient", model_gradient()),
        Check::from_result("dense simulator oracle", dense_oracle(seeds)),
        Check::from_result("rff fourier series", rff_series(seeds)),
        Check::from_result("superresolution", superres_plumbing()),
    ]
}

/// Renders checks as an aligned text table.
pub fn format_table(checks: &[Check]) -> String {
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status}  {:w$}  {}\n", c.name, c.detail));
    }
    out
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn param_counts() -> Result<(bool, String)> {
    let sound = ModelConfig::new(Family::Qiren, 1, 1).count_params()?;
    let image = ModelConfig::new(Family::Qiren, 2, 1).count_params()?;
    let pure = ModelConfig::new(Family::PureQuantum, 2, 1).count_params()?;
    let ms = 100.0 * memory_saving(sound, 1000)?;
    let mi = 100.0 * memory_saving(image, 1024)?;
    let ok = sound == 649 && image == 657 && pure == 72 && (ms - 35.1).abs() <= 0.05 && (mi - 35.8).abs() <= 0.05;
    Ok((ok, format!("qiren {sound}/{image}, pure quantum {pure}, saving {ms:.1}%/{mi:.1}%")))
}

fn fourier_exactness(seeds: u64) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for d in 1..=2 {
        for d_h in 1..=3 {
            for l in 1..=3 {
                for seed in 0..seeds.min(3) {
                    let spec = CircuitSpec::with_encoding(d_h, d, l, 2)?;
                    let mut rng = stream(seed, (d * 100 + d_h * 10 + l) as u64);
                    let params = CircuitParams::random(&spec, &mut rng);
                    let base: Vec<f64> = (0..d_h).map(|_| rng.random::<f64>() * TAU).collect();
                    for axis in 0..d_h {
                        let dft = circuit_dft(&spec, &params, axis, 0, &base, 64)?;
                        worst = worst.max(out_of_band_mass(&dft, (d * l) as f64));
                    }
                }
            }
        }
    }
    Ok((worst < 1e-10, format!("max out-of-band mass {worst:.1e}")))
}

fn spectrum_expansion() -> Result<(bool, String)> {
    let mut ok = true;
    for d in 1..=6 {
        let w: Vec<f64> = (0..d).map(|i| 1.0 + 0.37 * i as f64 + 0.11 * (i * i) as f64).collect();
        ok &= spectrum_recursion_linear(&w)?.len() == enumerate_linear_spectrum(&w).len();
        let pow3: Vec<f64> = (0..d).map(|i| 3f64.powi(i as i32)).collect();
        ok &= spectrum_recursion_linear(&pow3)?.len() == 3usize.pow(d as u32);
        ok &= spectrum_recursion_linear(&vec![1.0; d])?.len() == 2 * d + 1;
    }
    Ok((ok, "recursion = enumeration for d ≤ 6; 3^d and 2d+1 sizes".into()))
}

fn central_params_fd(spec: &CircuitSpec, params: &CircuitParams, h: &[f64], step: f64) -> Result<Array2<f64>> {
    let mut jac = Array2::zeros((spec.num_outputs(), params.len()));
    let mut p = params.clone();
    for j in 0..params.len() {
        let orig = p.as_slice()[j];
        p.as_mut_slice()[j] = orig + step;
        let plus = circuit_forward_with_noise(spec, &p, h, None)?;
        p.as_mut_slice()[j] = orig - step;
        let minus = circuit_forward_with_noise(spec, &p, h, None)?;
        p.as_mut_slice()[j] = orig;
        for k in 0..plus.len() {
            jac[[k, j]] = (plus[k] - minus[k]) / (2.0 * step);
        }
    }
    Ok(jac)
}

fn gradient_oracles(seeds: u64) -> Result<(bool, String)> {
    let (mut adj_vs_ps, mut fd_rel) = (0.0f64, 0.0f64);
    for seed in 0..seeds {
        let mut rng = stream(seed, 7);
        let n = rng.random_range(1..=6);
        let spec = CircuitSpec::new(n, rng.random_range(1..=2), rng.random_range(1..=2))?;
        let params = CircuitParams::random(&spec, &mut rng);
        let h: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ps = circuit_gradient_paramshift(&spec, &params, &h, GradWrt::Params)?;
        let ps_h = circuit_gradient_paramshift(&spec, &params, &h, GradWrt::Inputs)?;
        let (adj, adj_h) = circuit_gradient_adjoint(&spec, &params, &h)?;
        let fd = central_params_fd(&spec, &params, &h, 1e-5)?;
        for (a, b) in adj.iter().zip(&ps).chain(adj_h.iter().zip(&ps_h)) {
            adj_vs_ps = adj_vs_ps.max((a - b).abs());
        }
        for (a, b) in ps.iter().zip(&fd) {
            fd_rel = fd_rel.max(rel_err(*a, *b));
        }
    }
    Ok((
        adj_vs_ps < 1e-10 && fd_rel < 1e-6,
        format!("adjoint vs shift {adj_vs_ps:.1e}, vs finite differences {fd_rel:.1e} over {seeds} circuits"),
    ))
}

fn model_gradient() -> Result<(bool, String)> {
    let mut cfg = ModelConfig::new(Family::Qiren, 1, 1).seed(3);
    cfg.qubits = 2;
    cfg.hidden_dim = 2;
    cfg.depth = 2;
    cfg.blocks = 1;
    cfg.reuploads = 2;
    let mut model = build_model(&cfg)?;
    let x = Array2::from_shape_fn((12, 1), |(i, _)| -1.0 + 2.0 * i as f64 / 11.0);
    let y = x.mapv(|v| (3.0 * v).sin());
    let (_, grads) = model.stack.backprop(&x, &y)?;
    let p0 = model.stack.params();
    let step = 1e-6;
    let mut worst = 0.0f64;
    for j in 0..p0.len() {
        let mut p = p0.clone();
        p[j] = p0[j] + step;
        model.stack.set_params(&p)?;
        let plus = model.stack.backprop(&x, &y)?.0;
        p[j] = p0[j] - step;
        model.stack.set_params(&p)?;
        let minus = model.stack.backprop(&x, &y)?.0;
        worst = worst.max(rel_err(grads[j], (plus - minus) / (2.0 * step)));
    }
    model.stack.set_params(&p0)?;
    Ok((worst < 1e-5, format!("max relative error {worst:.1e} over {} params", p0.len())))
}

fn random_gate<R: Rng>(n: usize, rng: &mut R) -> Result<Gate> {
    let kinds: Vec<GateKind> = GateKind::ALL.iter().copied().filter(|k| k.num_targets() <= n).collect();
    let kind = kinds[rng.random_range(0..kinds.len())];
    let a = rng.random_range(0..n);
    let targets = if kind.num_targets() == 2 {
        let b = (a + rng.random_range(1..n)) % n;
        vec![a, b]
    } else {
        vec![a]
    };
    let params = (0..kind.num_params()).map(|_| rng.random_range(-TAU..TAU)).collect();
    Gate::new(kind, targets, params)
}

fn dense_oracle(seeds: u64) -> Result<(bool, String)> {
    let (mut worst, mut norm) = (0.0f64, 0.0f64);
    for seed in 0..seeds {
        let mut rng = stream(seed, 11);
        let n = rng.random_range(1..=4);
        let mut fast = StateVector::zero(n)?;
        let mut slow = fast.clone();
        for _ in 0..20 {
            let g = random_gate(n, &mut rng)?;
            fast.apply(&g)?;
            slow = dense_oracle_apply(&slow, &g)?;
        }
        for (a, b) in fast.amplitudes().iter().zip(slow.amplitudes()) {
            worst = worst.max((a - b).norm());
        }
        norm = norm.max((fast.norm_sqr() - 1.0).abs());
    }
    Ok((
        worst < 1e-12 && norm < 1e-10,
        format!("max amplitude error {worst:.1e}, norm drift {norm:.1e}"),
    ))
}

fn rff_series(seeds: u64) -> Result<(bool, String)> {
    let mut rng = stream(5, 13);
    let (d_in, m) = (2, 5);
    let rff = RffLayer::gaussian(d_in, m, RffLayer::DEFAULT_SIGMA, &mut rng)?;
    let a: Vec<f64> = (0..2 * m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b: f64 = rng.random_range(-1.0..1.0);
    let x = Array2::from_shape_fn((seeds.max(1) as usize, d_in), |_| rng.random_range(-1.0..1.0));
    let feats = rff.forward(&x)?;
    let mut worst = 0.0f64;
    for (i, row) in x.rows().into_iter().enumerate() {
        let perceptron: f64 = b + feats.row(i).iter().zip(&a).map(|(f, w)| f * w).sum::<f64>();
        let series: f64 = b + (0..m)
            .map(|k| {
                let phase = TAU * rff.mapping.row(k).dot(&row);
                a[k] * phase.cos() + a[m + k] * phase.sin()
            })
            .sum::<f64>();
        worst = worst.max((perceptron - series).abs());
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.1e}")))
}

fn superres_plumbing() -> Result<(bool, String)> {
    let mut cfg = ModelConfig::new(Family::Relu, 2, 1).seed(1);
    cfg.hidden_dim = 4;
    cfg.depth = 1;
    let model = build_model(&cfg)?;
    let grid = crate::tasks::pixel_grid(8, 8);
    let direct = model.predict(&grid)?;
    let up = superresolve(&model, 8, 8, 1)?;
    let exact = up.values == direct;
    let low = smooth_image(32, 0);
    let truth = smooth_image(64, 0);
    let nearest = image_mse(&interp_baseline(&low, Interp::Nearest, 2)?, &truth)?;
    let bilinear = image_mse(&interp_baseline(&low, Interp::Bilinear, 2)?, &truth)?;
    Ok((
        exact && bilinear <= nearest,
        format!("factor 1 exact: {exact}; bilinear {bilinear:.2e} vs nearest {nearest:.2e}"),
    ))
}
