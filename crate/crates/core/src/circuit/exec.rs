use std::f64::consts::FRAC_PI_2;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

use super::spec::{CircuitParams, CircuitSpec, Entangler};
use crate::error::{Error, Result};
use num_complex::Complex64;

use crate::sim::{
    adjoint2, apply_cnot, apply_cz, apply_mat2, apply_noise_angles, apply_rx, apply_rz,
    expectation, im_inner_xyz, inner_z, rot_matrix, sample_noise_angles, Observable, Pauli,
    StateVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    /// `RZ(h[feature])`
    Encode { qubit: usize, feature: usize },
    /// `Rot(params[p], params[p+1], params[p+2])`
    Rot { qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
}

fn compile(spec: &CircuitSpec) -> Vec<Op> {
    let nq = spec.num_qubits();
    let mut ops = Vec::new();
    for layer in 0..spec.reuploads() {
        for q in 0..nq {
            ops.push(Op::Encode {
                qubit: q,
                feature: spec.feature_of_qubit(q),
            });
        }
        for block in 0..spec.blocks() {
            for q in 0..nq {
                ops.push(Op::Rot {
                    qubit: q,
                    param: CircuitParams::index(spec, layer, block, q),
                });
            }
            if nq > 1 {
                for q in 0..nq {
                    let next = (q + 1) % nq;
                    ops.push(match spec.entangler_kind() {
                        Entangler::Cnot => Op::Cnot {
                            control: q,
                            target: next,
                        },
                        Entangler::Cz => Op::Cz { a: q, b: next },
                    });
                }
            }
        }
    }
    ops
}

/// Whole-layer form of the circuit used by every path except the
/// parameter-shift oracle, which runs [`compile`]'s gate list instead.
struct Plan<'a> {
    spec: &'a CircuitSpec,
    n: usize,
    ring: Ring,
    /// Set when every observable is a unit-weight single-qubit Z.
    z_wires: Option<Vec<usize>>,
}

enum Ring {
    None,
    /// Gathers: `after[j] = before[fwd[j]]`, `before[i] = after[inv[i]]`.
    Perm { fwd: Vec<usize>, inv: Vec<usize> },
    Signs(Vec<f64>),
}

impl<'a> Plan<'a> {
    fn new(spec: &'a CircuitSpec) -> Self {
        let n = spec.num_qubits();
        let dim = 1usize << n;
        let bit = |q: usize| 1usize << (n - 1 - q);
        let ring = if n == 1 {
            Ring::None
        } else {
            match spec.entangler_kind() {
                Entangler::Cnot => {
                    // image of each basis state under CNOT(0,1) … CNOT(n−1,0)
                    let image: Vec<usize> = (0..dim)
                        .map(|mut i| {
                            for q in 0..n {
                                if i & bit(q) != 0 {
                                    i ^= bit((q + 1) % n);
                                }
                            }
                            i
                        })
                        .collect();
                    let mut fwd = vec![0; dim];
                    for (i, &j) in image.iter().enumerate() {
                        fwd[j] = i;
                    }
                    Ring::Perm { fwd, inv: image }
                }
                Entangler::Cz => Ring::Signs(
                    (0..dim)
                        .map(|i| {
                            let odd = (0..n)
                                .filter(|&q| i & bit(q) != 0 && i & bit((q + 1) % n) != 0)
                                .count()
                                % 2;
                            if odd == 1 {
                                -1.0
                            } else {
                                1.0
                            }
                        })
                        .collect(),
                ),
            }
        };
        let z_wires = spec
            .observables()
            .iter()
            .map(|o| match o.terms() {
                [(c, s)] if *c == 1.0 => {
                    let mut active = s.iter().enumerate().filter(|(_, p)| **p != Pauli::I);
                    match (active.next(), active.next()) {
                        (Some((q, Pauli::Z)), None) => Some(q),
                        _ => None,
                    }
                }
                _ => None,
            })
            .collect();
        Self {
            spec,
            n,
            ring,
            z_wires,
        }
    }

    /// Diagonal of the full encoding layer, `Π_q RZ(h_{f(q)})`.
    fn encoding(&self, h: &[f64]) -> Vec<Complex64> {
        let mut table = vec![Complex64::new(1.0, 0.0)];
        for q in 0..self.n {
            let (s, c) = (0.5 * h[self.spec.feature_of_qubit(q)]).sin_cos();
            let lo = Complex64::new(c, -s);
            let hi = Complex64::new(c, s);
            table = table.iter().flat_map(|&t| [t * lo, t * hi]).collect();
        }
        table
    }

    fn ring_forward(&self, amps: &mut [Complex64], scratch: &mut [Complex64]) {
        match &self.ring {
            Ring::None => {}
            Ring::Perm { fwd, .. } => gather(amps, scratch, fwd),
            Ring::Signs(s) => amps.iter_mut().zip(s).for_each(|(a, s)| *a *= *s),
        }
    }

    fn ring_inverse(&self, amps: &mut [Complex64], scratch: &mut [Complex64]) {
        match &self.ring {
            Ring::None => {}
            Ring::Perm { inv, .. } => gather(amps, scratch, inv),
            Ring::Signs(s) => amps.iter_mut().zip(s).for_each(|(a, s)| *a *= *s),
        }
    }

    fn run(&self, params: &[f64], h: &[f64], noise: Option<&[f64]>) -> StateVector {
        let n = self.n;
        let mut state = StateVector::zero(n).expect("validated register size");
        let enc = self.encoding(h);
        let mut scratch = vec![Complex64::new(0.0, 0.0); enc.len()];
        let amps = state.amplitudes_mut();
        for layer in 0..self.spec.reuploads() {
            amps.iter_mut().zip(&enc).for_each(|(a, e)| *a *= e);
            for block in 0..self.spec.blocks() {
                for q in 0..n {
                    let p = CircuitParams::index(self.spec, layer, block, q);
                    apply_mat2(amps, n, q, &rot_matrix(params[p], params[p + 1], params[p + 2]));
                }
                self.ring_forward(amps, &mut scratch);
            }
        }
        if let Some(angles) = noise {
            apply_noise_angles(&mut state, angles);
        }
        state
    }

    fn measure(&self, state: &StateVector) -> Vec<f64> {
        match &self.z_wires {
            Some(wires) => {
                let n = self.n;
                let mut out = vec![0.0; wires.len()];
                for (i, a) in state.amplitudes().iter().enumerate() {
                    let p = a.norm_sqr();
                    for (o, &q) in out.iter_mut().zip(wires) {
                        if i >> (n - 1 - q) & 1 == 0 {
                            *o += p;
                        } else {
                            *o -= p;
                        }
                    }
                }
                out
            }
            None => measure(self.spec, state),
        }
    }

    /// `(Σ_k w_k O_k)|ψ⟩`
    fn weighted_apply(&self, weights: &[f64], psi: &StateVector) -> Result<StateVector> {
        let amps = match &self.z_wires {
            Some(wires) => {
                let n = self.n;
                psi.amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let d: f64 = weights
                            .iter()
                            .zip(wires)
                            .map(|(w, &q)| if i >> (n - 1 - q) & 1 == 0 { *w } else { -*w })
                            .sum();
                        a * d
                    })
                    .collect()
            }
            None => {
                let parts: Vec<(f64, &Observable)> =
                    weights.iter().copied().zip(self.spec.observables()).collect();
                Observable::combine(&parts)?.apply(psi)?
            }
        };
        StateVector::from_amplitudes(amps)
    }

    /// Reverse sweep from `psi` (the final state) and `lambda = O|psi⟩`.
    /// Returns `(∂/∂params, ∂/∂h)` of `⟨psi|O|psi⟩`.
    fn backward(
        &self,
        params: &[f64],
        h: &[f64],
        mut psi: StateVector,
        mut lambda: StateVector,
        noise: Option<&[f64]>,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        if let Some(angles) = noise {
            for (q, &t) in angles.iter().enumerate().rev() {
                apply_rx(psi.amplitudes_mut(), n, q, -t);
                apply_rx(lambda.amplitudes_mut(), n, q, -t);
            }
        }
        let enc_inv: Vec<Complex64> = self.encoding(h).iter().map(|e| e.conj()).collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); enc_inv.len()];
        let mut gp = vec![0.0; params.len()];
        let mut gh = vec![0.0; self.spec.num_features()];
        let psi = psi.amplitudes_mut();
        let lam = lambda.amplitudes_mut();
        // With ψ, λ taken just after U = exp(-iθP/2), d⟨O⟩/dθ = Im⟨λ|P|ψ⟩.
        // For Rot = RZ(φ)RY(θ)RZ(ω) the generators of θ and ω, conjugated
        // out to the gate's output, are cosφ·Y − sinφ·X and
        // cosθ·Z + sinθ(cosφ·X + sinφ·Y).
        for layer in (0..self.spec.reuploads()).rev() {
            for block in (0..self.spec.blocks()).rev() {
                self.ring_inverse(psi, &mut scratch);
                self.ring_inverse(lam, &mut scratch);
                for q in (0..n).rev() {
                    let p = CircuitParams::index(self.spec, layer, block, q);
                    let (phi, theta, omega) = (params[p], params[p + 1], params[p + 2]);
                    let [x, y, z] = im_inner_xyz(lam, psi, n, q);
                    let (sp, cp) = phi.sin_cos();
                    let (st, ct) = theta.sin_cos();
                    gp[p] = z;
                    gp[p + 1] = cp * y - sp * x;
                    gp[p + 2] = ct * z + st * (cp * x + sp * y);
                    let undo = adjoint2(&rot_matrix(phi, theta, omega));
                    apply_mat2(psi, n, q, &undo);
                    apply_mat2(lam, n, q, &undo);
                }
            }
            for q in 0..n {
                gh[self.spec.feature_of_qubit(q)] += inner_z(lam, psi, n, q).im;
            }
            psi.iter_mut().zip(&enc_inv).for_each(|(a, e)| *a *= e);
            lam.iter_mut().zip(&enc_inv).for_each(|(a, e)| *a *= e);
        }
        (gp, gh)
    }
}

fn gather(amps: &mut [Complex64], scratch: &mut [Complex64], src: &[usize]) {
    for (d, &s) in scratch.iter_mut().zip(src) {
        *d = amps[s];
    }
    amps.copy_from_slice(scratch);
}

fn check_inputs(spec: &CircuitSpec, params: &CircuitParams, h: &[f64]) -> Result<()> {
    if params.len() != spec.num_params() {
        return Err(Error::Shape(format!(
            "circuit expects {} parameters, got {}",
            spec.num_params(),
            params.len()
        )));
    }
    if h.len() != spec.num_features() {
        return Err(Error::Shape(format!(
            "circuit expects {} input features, got {}",
            spec.num_features(),
            h.len()
        )));
    }
    if let Some(v) = h.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("circuit input {v}")));
    }
    Ok(())
}

/// Runs the circuit from `|0…0⟩`. `shift` adds an offset to the angle of a
/// single encoding op (used by the parameter-shift rule for inputs).
fn run(
    spec: &CircuitSpec,
    ops: &[Op],
    params: &[f64],
    h: &[f64],
    shift: Option<(usize, f64)>,
    noise: Option<&[f64]>,
) -> StateVector {
    let n = spec.num_qubits();
    let mut state = StateVector::zero(n).expect("validated register size");
    let amps = state.amplitudes_mut();
    for (i, op) in ops.iter().enumerate() {
        match *op {
            Op::Encode { qubit, feature } => {
                let extra = match shift {
                    Some((j, d)) if j == i => d,
                    _ => 0.0,
                };
                apply_rz(amps, n, qubit, h[feature] + extra);
            }
            Op::Rot { qubit, param } => {
                let m = rot_matrix(params[param], params[param + 1], params[param + 2]);
                apply_mat2(amps, n, qubit, &m);
            }
            Op::Cnot { control, target } => apply_cnot(amps, n, control, target),
            Op::Cz { a, b } => apply_cz(amps, n, a, b),
        }
    }
    if let Some(angles) = noise {
        apply_noise_angles(&mut state, angles);
    }
    state
}

fn measure(spec: &CircuitSpec, state: &StateVector) -> Vec<f64> {
    spec.observables()
        .iter()
        .map(|o| expectation(state, o).expect("observable matches register"))
        .collect()
}

/// Final statevector of the noiseless circuit.
pub fn circuit_state(spec: &CircuitSpec, params: &CircuitParams, h: &[f64]) -> Result<StateVector> {
    check_inputs(spec, params, h)?;
    Ok(Plan::new(spec).run(params.as_slice(), h, None))
}

/// `[⟨O_1⟩, …, ⟨O_{d_f}⟩]` for input `h`. Noise angles, if the spec carries
/// a noise bound, are drawn from `rng`.
pub fn circuit_forward<R: Rng + ?Sized>(
    spec: &CircuitSpec,
    params: &CircuitParams,
    h: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_inputs(spec, params, h)?;
    let noise = if spec.noise_bound() > 0.0 {
        Some(sample_noise_angles(spec.num_qubits(), spec.noise_bound(), rng)?)
    } else {
        None
    };
    circuit_forward_with_noise(spec, params, h, noise.as_deref())
}

/// Forward pass with an explicit pre-measurement noise realization.
pub fn circuit_forward_with_noise(
    spec: &CircuitSpec,
    params: &CircuitParams,
    h: &[f64],
    noise: Option<&[f64]>,
) -> Result<Vec<f64>> {
    check_inputs(spec, params, h)?;
    check_noise(spec, noise)?;
    let plan = Plan::new(spec);
    Ok(plan.measure(&plan.run(params.as_slice(), h, noise)))
}

fn check_noise(spec: &CircuitSpec, noise: Option<&[f64]>) -> Result<()> {
    match noise {
        Some(a) if a.len() != spec.num_qubits() => Err(Error::Shape(format!(
            "{} noise angles for {} qubits",
            a.len(),
            spec.num_qubits()
        ))),
        _ => Ok(()),
    }
}

/// Forward pass over a batch (rows of `inputs`), rows evaluated in parallel.
/// `noise` holds one realization per row when given.
pub fn circuit_forward_batch(
    spec: &CircuitSpec,
    params: &CircuitParams,
    inputs: &Array2<f64>,
    noise: Option<&Array2<f64>>,
) -> Result<Array2<f64>> {
    let plan = Plan::new(spec);
    let rows: Vec<usize> = (0..inputs.nrows()).collect();
    let out: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&r| {
            let h = inputs.row(r).to_vec();
            check_inputs(spec, params, &h)?;
            let nz = noise.map(|m| m.row(r).to_vec());
            check_noise(spec, nz.as_deref())?;
            let state = plan.run(params.as_slice(), &h, nz.as_deref());
            Ok(plan.measure(&state))
        })
        .collect::<Result<_>>()?;
    let d_f = spec.num_outputs();
    Ok(Array2::from_shape_vec(
        (out.len(), d_f),
        out.into_iter().flatten().collect(),
    )
    .expect("row lengths equal d_f"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradWrt {
    Params,
    Inputs,
}

/// Jacobian `[d_f × n]` by the two-term parameter-shift rule. Every rotation
/// generator here is a Pauli over two, so the shift is `π/2` and the
/// estimate `[f(θ+π/2) − f(θ−π/2)]/2` is exact. An input feature's
/// derivative sums the shifts of every encoding gate that reads it.
pub fn circuit_gradient_paramshift(
    spec: &CircuitSpec,
    params: &CircuitParams,
    h: &[f64],
    wrt: GradWrt,
) -> Result<Array2<f64>> {
    if spec.noise_bound() > 0.0 {
        return Err(Error::NoisyGradient(spec.noise_bound()));
    }
    check_inputs(spec, params, h)?;
    let ops = compile(spec);
    let d_f = spec.num_outputs();
    let eval = |p: &[f64], shift: Option<(usize, f64)>| measure(spec, &run(spec, &ops, p, h, shift, None));
    match wrt {
        GradWrt::Params => {
            let mut jac = Array2::zeros((d_f, params.len()));
            let mut p = params.as_slice().to_vec();
            for j in 0..p.len() {
                let orig = p[j];
                p[j] = orig + FRAC_PI_2;
                let plus = eval(&p, None);
                p[j] = orig - FRAC_PI_2;
                let minus = eval(&p, None);
                p[j] = orig;
                for k in 0..d_f {
                    jac[[k, j]] = 0.5 * (plus[k] - minus[k]);
                }
            }
            Ok(jac)
        }
        GradWrt::Inputs => {
            let mut jac = Array2::zeros((d_f, spec.num_features()));
            for (i, op) in ops.iter().enumerate() {
                if let Op::Encode { feature, .. } = *op {
                    let plus = eval(params.as_slice(), Some((i, FRAC_PI_2)));
                    let minus = eval(params.as_slice(), Some((i, -FRAC_PI_2)));
                    for k in 0..d_f {
                        jac[[k, feature]] += 0.5 * (plus[k] - minus[k]);
                    }
                }
            }
            Ok(jac)
        }
    }
}

/// Parameter and input Jacobians (`[d_f × P]`, `[d_f × d_h]`) by adjoint
/// differentiation: one forward sweep, then one backward sweep per output.
pub fn circuit_gradient_adjoint(
    spec: &CircuitSpec,
    params: &CircuitParams,
    h: &[f64],
) -> Result<(Array2<f64>, Array2<f64>)> {
    if spec.noise_bound() > 0.0 {
        return Err(Error::NoisyGradient(spec.noise_bound()));
    }
    check_inputs(spec, params, h)?;
    let plan = Plan::new(spec);
    let psi = plan.run(params.as_slice(), h, None);
    let d_f = spec.num_outputs();
    let mut jp = Array2::zeros((d_f, params.len()));
    let mut jh = Array2::zeros((d_f, spec.num_features()));
    for (k, obs) in spec.observables().iter().enumerate() {
        let lambda = StateVector::from_amplitudes(obs.apply(&psi)?)?;
        let (gp, gh) = plan.backward(params.as_slice(), h, psi.clone(), lambda, None);
        jp.row_mut(k).assign(&ndarray::Array1::from(gp));
        jh.row_mut(k).assign(&ndarray::Array1::from(gh));
    }
    Ok((jp, jh))
}

/// Vector-Jacobian product `Σ_k w_k ∂⟨O_k⟩/∂(params, h)` in a single
/// backward sweep against the weighted observable `Σ_k w_k O_k`. A noise
/// realization, if given, is treated as fixed gates.
pub fn circuit_vjp(
    spec: &CircuitSpec,
    params: &CircuitParams,
    h: &[f64],
    weights: &[f64],
    noise: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_inputs(spec, params, h)?;
    check_noise(spec, noise)?;
    if weights.len() != spec.num_outputs() {
        return Err(Error::Shape(format!(
            "{} output weights for {} outputs",
            weights.len(),
            spec.num_outputs()
        )));
    }
    let plan = Plan::new(spec);
    let psi = plan.run(params.as_slice(), h, noise);
    let lambda = plan.weighted_apply(weights, &psi)?;
    Ok(plan.backward(params.as_slice(), h, psi, lambda, noise))
}

/// Number of gates in the compiled circuit (Rot counted once).
pub fn gate_count(spec: &CircuitSpec) -> usize {
    compile(spec).len()
}
