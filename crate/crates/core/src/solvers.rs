//! Constrained recovery: `min R(z)` subject to `‖y − P_Ω U z‖₂ ≤ η`, with
//! `R` the ℓ¹ norm, a weighted ℓ¹ norm or isotropic total variation.
//!
//! All three use one adaptive primal-dual hybrid gradient iteration: steps
//! keep `τ σ L² = 0.95` fixed while their ratio is rebalanced from the primal
//! and dual residuals. Each iteration costs one forward and one adjoint
//! application; `K z̄` is formed from stored products by linearity.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::rng::{gaussian_vec, seeded};
use crate::sampling::SamplingMap;
use crate::transforms::{LinearOperator, Operator, Subsampled};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    L1,
    /// One positive weight per coefficient.
    WeightedL1 { weights: Vec<f64> },
    /// Isotropic TV of an `n × n` image; `U` acts on the image itself.
    Tv { side: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverControls {
    pub max_iterations: usize,
    /// Stop once the primal-dual residual surrogate and the constraint
    /// violation `‖A z − y‖ − η` both fall below `tolerance` relative.
    pub tolerance: f64,
    pub power_iterations: usize,
    /// Constrain the unknown to real values.
    pub real: bool,
    /// Keep every `log_every`-th iteration in the log (0 disables it).
    pub log_every: usize,
    /// Initial `τ / σ`; the adaptive scheme rebalances it.
    pub step_ratio: f64,
}

impl Default for SolverControls {
    fn default() -> Self {
        SolverControls { max_iterations: 2000, tolerance: 1e-6, power_iterations: 20, real: false, log_every: 1, step_ratio: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    /// `U`, the full (unsubsampled) operator.
    pub operator: Operator,
    /// Sampled rows of `U`, in the order of `measurements`.
    pub rows: Vec<usize>,
    pub measurements: Vec<C64>,
    pub eta: f64,
    pub regularizer: Regularizer,
    pub controls: SolverControls,
    /// Maps the estimate to the reconstruction (e.g. wavelet synthesis);
    /// identity when absent.
    pub synthesis: Option<Operator>,
    /// Reference for the relative error, in reconstruction space.
    pub ground_truth: Option<Vec<C64>>,
}

impl RecoveryProblem {
    /// A problem on the rows of `map`, in increasing index order.
    pub fn new(operator: Operator, map: &SamplingMap, measurements: Vec<C64>, eta: f64) -> Self {
        RecoveryProblem {
            operator,
            rows: map.indices(),
            measurements,
            eta,
            regularizer: Regularizer::L1,
            controls: SolverControls::default(),
            synthesis: None,
            ground_truth: None,
        }
    }

    /// Noiseless measurements `P_Ω U x` of a known `x`.
    pub fn measure(operator: &Operator, rows: &[usize], x: &[C64]) -> Vec<C64> {
        let full = operator.apply(x);
        rows.iter().map(|&r| full[r]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.measurements.len() != self.rows.len() {
            return Err(Error::DimensionMismatch { expected: self.rows.len(), found: self.measurements.len() });
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::invalid("η must be finite and non-negative"));
        }
        let n = self.operator.dim_in();
        match &self.regularizer {
            Regularizer::L1 => {}
            Regularizer::WeightedL1 { weights } => {
                if weights.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
                }
                if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
                    return Err(Error::invalid("ℓ¹ weights must be positive and finite"));
                }
            }
            Regularizer::Tv { side } => {
                if side * side != n {
                    return Err(Error::invalid("TV side does not match the operator"));
                }
            }
        }
        if let Some(s) = &self.synthesis {
            if s.dim_in() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.dim_in() });
            }
        }
        let c = &self.controls;
        if c.max_iterations == 0 || !(c.tolerance > 0.0) {
            return Err(Error::invalid("solver needs at least one iteration and a positive tolerance"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub residual: f64,
    pub best_objective: f64,
    /// Primal-dual residual surrogate, relative.
    pub gap: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub estimate: Vec<C64>,
    pub reconstruction: Vec<C64>,
    pub objective: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Percent, when a ground truth was supplied.
    pub relative_error: Option<f64>,
    /// `‖Im x̂‖² / ‖x̂‖²` of the reconstruction.
    pub imaginary_energy: f64,
    pub operator_norm: f64,
    pub log: Vec<IterationRecord>,
}

impl RecoveryResult {
    pub fn real_reconstruction(&self) -> Vec<f64> {
        self.reconstruction.iter().map(|z| z.re).collect()
    }
}

/// `‖x̂ − x‖₂ / ‖x‖₂ × 100`.
pub fn relative_error(xhat: &[C64], xref: &[C64]) -> Result<f64> {
    if xhat.len() != xref.len() {
        return Err(Error::DimensionMismatch { expected: xref.len(), found: xhat.len() });
    }
    let den = norm(xref);
    if den == 0.0 {
        return Err(Error::invalid("relative error against a zero reference"));
    }
    Ok(100.0 * crate::linalg::dist(xhat, xref) / den)
}

/// Relative error of real images.
pub fn relative_error_real(xhat: &[f64], xref: &[f64]) -> Result<f64> {
    relative_error(&crate::linalg::to_complex(xhat), &crate::linalg::to_complex(xref))
}

/// `‖A‖₂` by power iteration on `A* A` from a fixed seeded start.
pub fn operator_norm(a: &dyn LinearOperator, iterations: usize) -> f64 {
    let mut rng = seeded(0x6e6f726d);
    let re = gaussian_vec(&mut rng, a.dim_in());
    let mut v: Vec<C64> = re.into_iter().map(|r| C64::new(r, 0.0)).collect();
    let mut est = 0.0;
    for _ in 0..iterations.max(1) {
        let nv = norm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        let av = a.apply(&v);
        est = norm(&av);
        v = a.adjoint(&av);
    }
    est
}

/// Forward differences with replicate boundary, stored as `[D₁ x ; D₂ x]`
/// where `D₁` differences along rows (`x(i+1, j) − x(i, j)`).
pub fn gradient(x: &[C64], n: usize, out: &mut [C64]) {
    let (d1, d2) = out.split_at_mut(n * n);
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            d1[k] = if i + 1 < n { x[k + n] - x[k] } else { ZERO };
            d2[k] = if j + 1 < n { x[k + 1] - x[k] } else { ZERO };
        }
    }
}

/// Adjoint of [`gradient`].
pub fn gradient_adjoint(g: &[C64], n: usize, out: &mut [C64]) {
    let (d1, d2) = g.split_at(n * n);
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let mut v = ZERO;
            if i + 1 < n {
                v -= d1[k];
            }
            if i > 0 {
                v += d1[k - n];
            }
            if j + 1 < n {
                v -= d2[k];
            }
            if j > 0 {
                v += d2[k - 1];
            }
            out[k] = v;
        }
    }
}

/// Isotropic TV `Σ ‖∇x(i, j)‖₂`.
pub fn tv_norm(x: &[C64], n: usize) -> f64 {
    let mut g = vec![ZERO; 2 * n * n];
    gradient(x, n, &mut g);
    (0..n * n).map(|k| (g[k].norm_sqr() + g[k + n * n].norm_sqr()).sqrt()).sum()
}

pub fn tv_norm_real(x: &[f64], n: usize) -> f64 {
    tv_norm(&crate::linalg::to_complex(x), n)
}

/// Pixelwise gradient magnitudes `‖∇x(i, j)‖₂`.
pub fn gradient_magnitudes(x: &[f64], n: usize) -> Vec<f64> {
    let mut g = vec![ZERO; 2 * n * n];
    gradient(&crate::linalg::to_complex(x), n, &mut g);
    (0..n * n).map(|k| (g[k].norm_sqr() + g[k + n * n].norm_sqr()).sqrt()).collect()
}

pub fn solve_l1(problem: &RecoveryProblem) -> Result<RecoveryResult> {
    if !matches!(problem.regularizer, Regularizer::L1) {
        return Err(Error::invalid("solve_l1 needs the ℓ¹ regularizer"));
    }
    solve(problem)
}

pub fn solve_weighted_l1(problem: &RecoveryProblem) -> Result<RecoveryResult> {
    if !matches!(problem.regularizer, Regularizer::WeightedL1 { .. }) {
        return Err(Error::invalid("solve_weighted_l1 needs weights"));
    }
    solve(problem)
}

pub fn solve_tv(problem: &RecoveryProblem) -> Result<RecoveryResult> {
    if !matches!(problem.regularizer, Regularizer::Tv { .. }) {
        return Err(Error::invalid("solve_tv needs the TV regularizer"));
    }
    solve(problem)
}

/// Per-scale weights `w_k = a^k`, expanded over the levels' index ranges.
pub fn scale_weights(levels: &crate::LevelStructure, a: f64) -> Vec<f64> {
    let mut w = Vec::with_capacity(levels.total());
    for (k, r) in levels.ranges().enumerate() {
        w.extend(core::iter::repeat(a.powi(k as i32)).take(r.len()));
    }
    w
}

/// Projection onto `{v : ‖v − y‖ ≤ η}`.
fn project_ball(v: &mut [C64], y: &[C64], eta: f64) {
    let d: f64 = v.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    if d > eta {
        let s = if d > 0.0 { eta / d } else { 0.0 };
        for (a, b) in v.iter_mut().zip(y) {
            *a = b + (*a - b) * s;
        }
    }
}

fn sub_norm(a: &[C64], b: &[C64]) -> f64 {
    crate::linalg::dist(a, b)
}

/// Dispatches on the regularizer. Unweighted ℓ¹ runs the weighted code path
/// with unit weights, so both produce identical iterates.
pub fn solve(problem: &RecoveryProblem) -> Result<RecoveryResult> {
    problem.validate()?;
    let n = problem.operator.dim_in();
    let a = Subsampled::new(Arc::clone(&problem.operator), problem.rows.clone())?;
    let m = problem.measurements.len();
    let c = problem.controls;
    // Both objectives are positively homogeneous: solve for y/s, η/s and
    // rescale. With s = ‖y‖/√n the unknowns are O(1) whatever the units of y.
    let unit = match norm(&problem.measurements) / (n.max(1) as f64).sqrt() {
        s if s > 0.0 && s.is_finite() => s,
        _ => 1.0,
    };
    let y_unit: Vec<C64> = problem.measurements.iter().map(|v| v / unit).collect();
    let y = &y_unit;
    let eta = problem.eta / unit;
    let ny = norm(y);

    let (weights, tv_side) = match &problem.regularizer {
        Regularizer::L1 => (Some(vec![1.0; n]), None),
        Regularizer::WeightedL1 { weights } => (Some(weights.clone()), None),
        Regularizer::Tv { side } => (None, Some(*side)),
    };
    let g_len = tv_side.map_or(0, |s| 2 * s * s);
    let objective = |z: &[C64]| -> f64 {
        match (&weights, tv_side) {
            (Some(w), _) => z.iter().zip(w).map(|(v, w)| w * v.norm()).sum(),
            (None, Some(s)) => tv_norm(z, s),
            _ => unreachable!(),
        }
    };

    let op_norm = if m == 0 { 0.0 } else { operator_norm(&a, c.power_iterations) };
    let l2 = (1.01 * op_norm).powi(2) + if tv_side.is_some() { 8.0 } else { 0.0 };
    let l2 = if l2 > 0.0 { l2 } else { 1.0 };
    let rho = c.step_ratio.sqrt();
    let mut tau = (0.95 / l2).sqrt() * rho;
    let mut sigma = (0.95 / l2).sqrt() / rho;
    let (mut alpha, adapt_decay, delta) = (0.5, 0.95, 1.5);

    let mut z = vec![ZERO; n];
    let mut w = vec![ZERO; m];
    let mut q = vec![ZERO; g_len];
    let mut az = vec![ZERO; m];
    let mut gz = vec![ZERO; g_len];
    // K* (w, q)
    let mut kt = vec![ZERO; n];

    let mut z_new = vec![ZERO; n];
    let mut az_new = vec![ZERO; m];
    let mut gz_new = vec![ZERO; g_len];
    let mut w_new = vec![ZERO; m];
    let mut q_new = vec![ZERO; g_len];
    let mut kt_new = vec![ZERO; n];
    let mut scratch = vec![ZERO; n];

    let feas_slack = c.tolerance * ny;
    let mut best: Option<(f64, Vec<C64>, f64)> = None;
    let mut log = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut last_residual = ny;

    for it in 0..c.max_iterations {
        iterations = it + 1;
        // Primal step.
        for i in 0..n {
            z_new[i] = z[i] - kt[i] * tau;
        }
        if let Some(wt) = &weights {
            for (v, &wi) in z_new.iter_mut().zip(wt) {
                let t = tau * wi;
                let mag = v.norm();
                *v = if mag > t { *v * ((mag - t) / mag) } else { ZERO };
            }
        }
        if c.real {
            z_new.iter_mut().for_each(|v| v.im = 0.0);
        }
        a.apply_into(&z_new, &mut az_new);
        if let Some(s) = tv_side {
            gradient(&z_new, s, &mut gz_new);
        }

        // Dual step on the ball constraint: w + σ (2Az⁺ − Az) − σ P_B(...).
        for i in 0..m {
            let v = w[i] + (az_new[i] * 2.0 - az[i]) * sigma;
            w_new[i] = v;
        }
        {
            let mut proj: Vec<C64> = w_new.iter().map(|v| v / sigma).collect();
            project_ball(&mut proj, y, eta);
            for i in 0..m {
                w_new[i] -= proj[i] * sigma;
            }
        }
        // Dual step on TV: projection onto pixelwise unit discs.
        if let Some(s) = tv_side {
            let nn = s * s;
            for k in 0..nn {
                let a1 = q[k] + (gz_new[k] * 2.0 - gz[k]) * sigma;
                let a2 = q[k + nn] + (gz_new[k + nn] * 2.0 - gz[k + nn]) * sigma;
                let mag = (a1.norm_sqr() + a2.norm_sqr()).sqrt();
                let sc = if mag > 1.0 { 1.0 / mag } else { 1.0 };
                q_new[k] = a1 * sc;
                q_new[k + nn] = a2 * sc;
            }
        }
        a.adjoint_into(&w_new, &mut kt_new);
        if let Some(s) = tv_side {
            gradient_adjoint(&q_new, s, &mut scratch);
            for i in 0..n {
                kt_new[i] += scratch[i];
            }
        }

        let residual = sub_norm(&az_new, y);
        last_residual = residual;
        let obj = objective(&z_new);
        if residual <= eta + feas_slack && best.as_ref().map_or(true, |b| obj < b.0) {
            best = Some((obj, z_new.clone(), residual));
        }
        // Residuals of the adaptive scheme.
        let mut p2 = 0.0;
        for i in 0..n {
            p2 += ((z[i] - z_new[i]) / tau - (kt[i] - kt_new[i])).norm_sqr();
        }
        let mut d2 = 0.0;
        for i in 0..m {
            d2 += ((w[i] - w_new[i]) / sigma - (az[i] - az_new[i])).norm_sqr();
        }
        for i in 0..g_len {
            d2 += ((q[i] - q_new[i]) / sigma - (gz[i] - gz_new[i])).norm_sqr();
        }
        let (p, d) = (p2.sqrt(), d2.sqrt());
        let scale = norm(&kt_new) + norm(&az_new) + norm(&gz_new) + ny + f64::MIN_POSITIVE;
        let gap = (p + d) / scale;
        if c.log_every > 0 && (it % c.log_every == 0 || it + 1 == c.max_iterations) {
            log.push(IterationRecord {
                iteration: it + 1,
                objective: obj * unit,
                residual: residual * unit,
                best_objective: best.as_ref().map_or(f64::INFINITY, |b| b.0 * unit),
                gap,
                tau,
            });
        }


        core::mem::swap(&mut z, &mut z_new);
        core::mem::swap(&mut w, &mut w_new);
        core::mem::swap(&mut q, &mut q_new);
        core::mem::swap(&mut az, &mut az_new);
        core::mem::swap(&mut gz, &mut gz_new);
        core::mem::swap(&mut kt, &mut kt_new);

        if gap <= c.tolerance && residual <= eta + feas_slack {
            converged = true;
            break;
        }
        if p > delta * d {
            tau /= 1.0 - alpha;
            sigma *= 1.0 - alpha;
            alpha *= adapt_decay;
        } else if p * delta < d {
            tau *= 1.0 - alpha;
            sigma /= 1.0 - alpha;
            alpha *= adapt_decay;
        }
    }

    let (obj, mut estimate, residual) = match best {
        Some((o, e, r)) => (o * unit, e, r * unit),
        None => (objective(&z) * unit, z, last_residual * unit),
    };
    estimate.iter_mut().for_each(|v| *v *= unit);
    let reconstruction = match &problem.synthesis {
        Some(s) => s.apply(&estimate),
        None => estimate.clone(),
    };
    let total = crate::linalg::norm_sq(&reconstruction);
    let imag: f64 = reconstruction.iter().map(|v| v.im * v.im).sum();
    let imaginary_energy = if total > 0.0 { imag / total } else { 0.0 };
    let relative_error = match &problem.ground_truth {
        None => None,
        Some(gt) => {
            let real_truth = gt.iter().all(|v| v.im == 0.0);
            Some(if real_truth {
                let re: Vec<C64> = reconstruction.iter().map(|v| C64::new(v.re, 0.0)).collect();
                relative_error(&re, gt)?
            } else {
                relative_error(&reconstruction, gt)?
            })
        }
    };
    Ok(RecoveryResult {
        estimate,
        reconstruction,
        objective: obj,
        residual,
        iterations,
        converged,
        relative_error,
        imaginary_energy,
        operator_norm: op_norm,
        log,
    })
}

/// Short description of the problem for logs.
pub fn describe(problem: &RecoveryProblem) -> String {
    alloc::format!(
        "{} rows of {} with η = {:e}, {:?}",
        problem.rows.len(),
        problem.operator.name(),
        problem.eta,
        problem.regularizer
    )
}
