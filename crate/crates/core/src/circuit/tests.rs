use std::f64::consts::{FRAC_PI_2, PI};

use super::*;
use crate::rng;
use crate::sim::{dense_oracle_apply, expectation, Gate, Observable, StateVector};

fn minus_cos_circuit() -> (CircuitSpec, CircuitParams) {
    // S(h) W1 S(h) W2 with W1 = W2 = RY(π/2); the first encoding acts on |0⟩
    // and only contributes a global phase.
    let spec = CircuitSpec::new(1, 2, 1).unwrap();
    let params = CircuitParams::from_vec(&spec, vec![0.0, FRAC_PI_2, 0.0, 0.0, FRAC_PI_2, 0.0]).unwrap();
    (spec, params)
}

fn forward(spec: &CircuitSpec, params: &CircuitParams, h: &[f64]) -> Vec<f64> {
    circuit_forward(spec, params, h, &mut rng::stream(0, 0)).unwrap()
}

fn random_case(seed: u64, features: usize, d: usize, l: usize, k: usize) -> (CircuitSpec, CircuitParams, Vec<f64>) {
    use rand::Rng;
    let spec = CircuitSpec::with_encoding(features, d, l, k).unwrap();
    let mut r = rng::stream(seed, 1);
    let params = CircuitParams::random(&spec, &mut r);
    let h = (0..features).map(|_| r.random_range(-PI..PI)).collect();
    (spec, params, h)
}

#[test]
fn zero_params_diagonal_circuit_is_constant() {
    let spec = CircuitSpec::new(1, 1, 1).unwrap();
    let params = CircuitParams::zeros(&spec);
    for h in [-3.0, -0.2, 0.0, 1.0, 2.5] {
        assert!((forward(&spec, &params, &[h])[0] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn minus_cos_closed_form() {
    let (spec, params) = minus_cos_circuit();
    for i in 0..32 {
        let h = -PI + i as f64 * 0.2;
        assert!((forward(&spec, &params, &[h])[0] + h.cos()).abs() < 1e-12);
    }
}

#[test]
fn circuit_matches_hand_built_dense_evolution() {
    let (spec, params, h) = random_case(11, 3, 1, 2, 2);
    let spec = spec.entangler(Entangler::Cz);
    let p = params.as_slice();
    let mut s = StateVector::zero(3).unwrap();
    for layer in 0..2 {
        for q in 0..3 {
            s = dense_oracle_apply(&s, &Gate::rz(q, h[q])).unwrap();
        }
        for block in 0..2 {
            for q in 0..3 {
                let i = ((layer * 2 + block) * 3 + q) * 3;
                s = dense_oracle_apply(&s, &Gate::rot(q, p[i], p[i + 1], p[i + 2])).unwrap();
            }
            for q in 0..3 {
                s = dense_oracle_apply(&s, &Gate::cz(q, (q + 1) % 3)).unwrap();
            }
        }
    }
    let got = circuit_state(&spec, &params, &h).unwrap();
    for (a, b) in got.amplitudes().iter().zip(s.amplitudes()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn outputs_bounded_and_periodic() {
    for seed in 0..10 {
        let (spec, params, h) = random_case(seed, 3, 1, 2, 2);
        let out = forward(&spec, &params, &h);
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        let mut shifted = h.clone();
        shifted[seed as usize % 3] += 2.0 * PI;
        let out2 = forward(&spec, &params, &shifted);
        for (a, b) in out.iter().zip(&out2) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn shape_and_nan_errors() {
    let spec = CircuitSpec::new(2, 1, 1).unwrap();
    let params = CircuitParams::zeros(&spec);
    let mut r = rng::stream(0, 0);
    assert!(circuit_forward(&spec, &params, &[0.1], &mut r).is_err());
    assert!(circuit_forward(&spec, &params, &[0.1, f64::NAN], &mut r).is_err());
    assert!(CircuitParams::from_vec(&spec, vec![0.0; 5]).is_err());
    assert!(CircuitSpec::new(2, 0, 1).is_err());
    assert!(CircuitSpec::new(2, 1, 1).unwrap().z_outputs(3).is_err());
}

#[test]
fn param_count() {
    let spec = CircuitSpec::new(8, 3, 2).unwrap();
    assert_eq!(spec.num_params(), 144);
    assert_eq!(CircuitSpec::with_encoding(2, 2, 3, 1).unwrap().num_params(), 36);
}

#[test]
fn gradients_rejected_under_noise() {
    let spec = CircuitSpec::new(1, 1, 1).unwrap().noise(0.1).unwrap();
    let params = CircuitParams::zeros(&spec);
    assert!(matches!(
        circuit_gradient_paramshift(&spec, &params, &[0.3], GradWrt::Params),
        Err(crate::Error::NoisyGradient(_))
    ));
    assert!(circuit_gradient_adjoint(&spec, &params, &[0.3]).is_err());
}

#[test]
fn shift_rule_on_minus_cos() {
    let (spec, params) = minus_cos_circuit();
    let g = circuit_gradient_paramshift(&spec, &params, &[FRAC_PI_2], GradWrt::Inputs).unwrap();
    assert!((g[[0, 0]] - 1.0).abs() < 1e-12);
    let (_, gh) = circuit_gradient_adjoint(&spec, &params, &[FRAC_PI_2]).unwrap();
    assert!((gh[[0, 0]] - 1.0).abs() < 1e-12);
}

#[test]
fn diagonal_circuit_has_zero_param_gradient() {
    let spec = CircuitSpec::new(1, 2, 1).unwrap();
    let params = CircuitParams::zeros(&spec);
    let g = circuit_gradient_paramshift(&spec, &params, &[0.7], GradWrt::Params).unwrap();
    assert!(g.iter().all(|v| v.abs() < 1e-12));
    let (jp, jh) = circuit_gradient_adjoint(&spec, &params, &[0.7]).unwrap();
    assert!(jp.iter().all(|v| v.abs() < 1e-12));
    assert!(jh.iter().all(|v| v.abs() < 1e-12));
}

fn central_difference(f: impl Fn(f64) -> Vec<f64>, x: f64, step: f64) -> Vec<f64> {
    let p = f(x + step);
    let m = f(x - step);
    p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * step)).collect()
}

#[test]
fn paramshift_matches_finite_differences() {
    let (spec, params, h) = random_case(5, 3, 1, 2, 1);
    let jac = circuit_gradient_paramshift(&spec, &params, &h, GradWrt::Params).unwrap();
    for j in 0..params.len() {
        let fd = central_difference(
            |v| {
                let mut p = params.clone();
                p.as_mut_slice()[j] = v;
                forward(&spec, &p, &h)
            },
            params.as_slice()[j],
            1e-5,
        );
        for (k, fdk) in fd.iter().enumerate() {
            assert!((jac[[k, j]] - fdk).abs() < 1e-6 * (1.0 + fdk.abs()));
        }
    }
    let jh = circuit_gradient_paramshift(&spec, &params, &h, GradWrt::Inputs).unwrap();
    for f in 0..h.len() {
        let fd = central_difference(
            |v| {
                let mut x = h.clone();
                x[f] = v;
                forward(&spec, &params, &x)
            },
            h[f],
            1e-5,
        );
        for (k, fdk) in fd.iter().enumerate() {
            assert!((jh[[k, f]] - fdk).abs() < 1e-6 * (1.0 + fdk.abs()));
        }
    }
}

#[test]
fn adjoint_matches_paramshift() {
    for (seed, (f, d, l, k)) in [(1, 1, 1, 1), (2, 1, 2, 2), (3, 1, 2, 1), (2, 2, 3, 1), (3, 2, 1, 2)]
        .into_iter()
        .enumerate()
    {
        let (spec, params, h) = random_case(seed as u64, f, d, l, k);
        let spec = if seed % 2 == 0 { spec } else { spec.entangler(Entangler::Cz) };
        let ps = circuit_gradient_paramshift(&spec, &params, &h, GradWrt::Params).unwrap();
        let pi = circuit_gradient_paramshift(&spec, &params, &h, GradWrt::Inputs).unwrap();
        let (ap, ai) = circuit_gradient_adjoint(&spec, &params, &h).unwrap();
        for (a, b) in ps.iter().zip(&ap).chain(pi.iter().zip(&ai)) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn vjp_equals_weighted_jacobian_rows() {
    let (spec, params, h) = random_case(9, 3, 1, 2, 2);
    let w = [0.3, -1.2, 0.8];
    let (gp, gh) = circuit_vjp(&spec, &params, &h, &w, None).unwrap();
    let (jp, jh) = circuit_gradient_adjoint(&spec, &params, &h).unwrap();
    for j in 0..gp.len() {
        let expect: f64 = (0..3).map(|k| w[k] * jp[[k, j]]).sum();
        assert!((gp[j] - expect).abs() < 1e-12);
    }
    for f in 0..gh.len() {
        let expect: f64 = (0..3).map(|k| w[k] * jh[[k, f]]).sum();
        assert!((gh[f] - expect).abs() < 1e-12);
    }
}

#[test]
fn vjp_through_fixed_noise_matches_finite_differences() {
    let (spec, params, h) = random_case(21, 2, 1, 2, 1);
    let noise = [0.04, 0.11];
    let w = [1.0, -0.5];
    let (gp, _) = circuit_vjp(&spec, &params, &h, &w, Some(&noise)).unwrap();
    let objective = |p: &CircuitParams| {
        let out = circuit_forward_with_noise(&spec, p, &h, Some(&noise)).unwrap();
        w[0] * out[0] + w[1] * out[1]
    };
    for j in 0..params.len() {
        let mut p = params.clone();
        p.as_mut_slice()[j] += 1e-5;
        let up = objective(&p);
        p.as_mut_slice()[j] -= 2e-5;
        let down = objective(&p);
        let fd = (up - down) / 2e-5;
        assert!((gp[j] - fd).abs() < 1e-7);
    }
}

#[test]
fn batch_forward_matches_single() {
    let (spec, params, _) = random_case(3, 2, 1, 2, 1);
    let inputs = ndarray::array![[0.1, 0.2], [-1.0, 2.0], [3.0, 0.0]];
    let out = circuit_forward_batch(&spec, &params, &inputs, None).unwrap();
    for r in 0..3 {
        let single = forward(&spec, &params, &inputs.row(r).to_vec());
        assert_eq!(out.row(r).to_vec(), single);
    }
}

#[test]
fn custom_observable() {
    let (spec, params) = minus_cos_circuit();
    let x = Observable::single(1, 0, crate::sim::Pauli::X).unwrap();
    let spec = spec.observables_from(vec![x.clone()]).unwrap();
    let h = 0.4;
    let state = circuit_state(&spec, &params, &[h]).unwrap();
    let direct = expectation(&state, &x).unwrap();
    assert!((forward(&spec, &params, &[h])[0] - direct).abs() < 1e-15);
}
