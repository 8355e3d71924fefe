//! Infinite-dimensional recovery: continuous Fourier samples of a function
//! supported in `[0, 1]^d`, a truncated synthesis matrix against boundary
//! wavelets, and the discrete baselines that model the same samples with a
//! DFT.
//!
//! Frequencies sit on the half-integer grid `ω_j = j/2`, `j = −N..N−1`
//! (index `j + N`, DC at `N`). With that spacing the period-2 extension of `f`
//! (zero on `[1, 2)`) has the Fourier series `½ Σ_j ĝ(j/2) e^{πijt}`, whose
//! truncation is `f_N`. On the grid `t_m = m/N` of `[0, 2)`, DFT-generated
//! samples `ĝ_j = (1/N) Σ_m x_m e^{−πijm/N}` are reproduced exactly.
//!
//! Basis functions are the boundary-corrected Daubechies wavelets with
//! stationary edge rows, so interior and edge scaling functions both obey
//! exact refinement equations and their Fourier integrals need no spatial
//! quadrature.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{relative_error_percent, to_complex};
use crate::sampling::SamplingMap;
use crate::signal::Shape;
use crate::solvers::{solve, RecoveryProblem, RecoveryResult, Regularizer, SolverControls};
use crate::transforms::wavelet::filters;
use crate::transforms::{
    compose, Adjoint, BoundaryMode, Dft1, Dwt1, FreqOrdering, LinearOperator, MatrixOperator, Operator,
    StationaryEdges, WaveletSpec,
};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Absolute tolerance of the adaptive quadrature.
pub const QUAD_TOL: f64 = 1e-12;
const QUAD_MAX_INTERVALS: usize = 20_000;

/// Frequency `j/2` of candidate index `i` on a grid of `2N` samples.
pub fn grid_frequency(half: usize, i: usize) -> f64 {
    (i as f64 - half as f64) / 2.0
}

/// All `2N` candidate frequencies, by index.
pub fn frequency_grid(half: usize) -> Vec<f64> {
    (0..2 * half).map(|i| grid_frequency(half, i)).collect()
}

/// `∫₀¹ e^{c t} dt = (e^c − 1)/c`.
fn exp_integral(c: C64) -> C64 {
    if c.norm() < 1e-3 {
        // Σ c^n/(n+1)!
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..12 {
            term = term * c / (n as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (c.exp() - 1.0) / c
    }
}

/// `∫₀¹ t e^{−s t} dt`.
fn ramp_integral(s: C64) -> C64 {
    if s.norm() < 1e-3 {
        // Σ (−s)^n / (n! (n + 2))
        let mut fact = C64::new(1.0, 0.0);
        let mut sum = C64::new(0.5, 0.0);
        for n in 1..12 {
            fact = fact * (-s) / n as f64;
            sum += fact / (n as f64 + 2.0);
        }
        sum
    } else {
        (C64::new(1.0, 0.0) - (-s).exp() * (1.0 + s)) / (s * s)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Zero,
    /// `Σ a e^{b t}`.
    ExpSum(Vec<(C64, C64)>),
    Ramp,
    /// `Σ c_k φ_k` in a wavelet basis.
    Expansion { basis: Arc<WaveletBasis>, coefficients: Vec<f64> },
    /// `f(x) g(y)`.
    Separable(Box<ContinuousTarget>, Box<ContinuousTarget>),
}

/// A function supported in `[0, 1]^d` with its Fourier integrals
/// `ĝ(ω) = ∫ f(t) e^{−2πi ω·t} dt`.
#[derive(Debug, Clone)]
pub struct ContinuousTarget {
    kind: Kind,
    label: String,
}

impl ContinuousTarget {
    pub fn zero() -> Self {
        ContinuousTarget { kind: Kind::Zero, label: "zero".into() }
    }

    /// Indicator of `[0, 1]`.
    pub fn ones() -> Self {
        Self::exp_sum("ones", vec![(C64::new(1.0, 0.0), ZERO)])
    }

    /// `exp(−t) cos²(t) = ½e^{−t} + ¼e^{(−1+2i)t} + ¼e^{(−1−2i)t}`.
    pub fn exp_cos2() -> Self {
        Self::exp_sum(
            "exp_cos2",
            vec![
                (C64::new(0.5, 0.0), C64::new(-1.0, 0.0)),
                (C64::new(0.25, 0.0), C64::new(-1.0, 2.0)),
                (C64::new(0.25, 0.0), C64::new(-1.0, -2.0)),
            ],
        )
    }

    /// `t` on `[0, 1]`.
    pub fn ramp() -> Self {
        ContinuousTarget { kind: Kind::Ramp, label: "ramp".into() }
    }

    /// `Σ c_k e^{2πikt}` on `[0, 1]`.
    pub fn trig(terms: &[(i64, C64)]) -> Self {
        let t = terms.iter().map(|&(k, c)| (c, C64::new(0.0, 2.0 * PI * k as f64))).collect();
        Self::exp_sum("trig", t)
    }

    /// `Σ a e^{b t}` on `[0, 1]`.
    pub fn exp_sum(label: &str, terms: Vec<(C64, C64)>) -> Self {
        ContinuousTarget { kind: Kind::ExpSum(terms), label: label.into() }
    }

    /// `Σ c_k φ_k`; `coefficients.len()` must equal the basis size.
    pub fn expansion(basis: Arc<WaveletBasis>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: coefficients.len() });
        }
        Ok(ContinuousTarget { kind: Kind::Expansion { basis, coefficients }, label: "expansion".into() })
    }

    /// The basis function `φ_k`.
    pub fn atom(basis: Arc<WaveletBasis>, k: usize) -> Result<Self> {
        let mut c = vec![0.0; basis.len()];
        *c.get_mut(k).ok_or_else(|| Error::invalid("atom index outside the basis"))? = 1.0;
        Self::expansion(basis, c)
    }

    /// `f(x) g(y)` on `[0, 1]²` from two 1D targets.
    pub fn separable(f: ContinuousTarget, g: ContinuousTarget) -> Result<Self> {
        if f.dim() != 1 || g.dim() != 1 {
            return Err(Error::invalid("separable targets need 1D factors"));
        }
        let label = alloc::format!("{}x{}", f.label, g.label);
        Ok(ContinuousTarget { kind: Kind::Separable(Box::new(f), Box::new(g)), label })
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            Kind::Separable(..) => 2,
            _ => 1,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `f(t)`; zero outside the unit cube. `t.len()` must equal `dim()`.
    pub fn eval(&self, t: &[f64]) -> C64 {
        if t.len() != self.dim() || t.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
            return ZERO;
        }
        let s = t[0];
        match &self.kind {
            Kind::Zero => ZERO,
            Kind::ExpSum(terms) => terms.iter().map(|&(a, b)| a * (b * s).exp()).sum(),
            Kind::Ramp => C64::new(s, 0.0),
            Kind::Expansion { basis, coefficients } => basis.evaluate(&to_complex(coefficients), &[s]).map_or(ZERO, |v| v[0]),
            Kind::Separable(f, g) => f.eval(&t[..1]) * g.eval(&t[1..]),
        }
    }

    /// `f` on the points `t_m = m/n`, `m < n` (1D only).
    pub fn grid_values(&self, n: usize) -> Vec<C64> {
        let pts: Vec<f64> = (0..n).map(|m| m as f64 / n as f64).collect();
        match &self.kind {
            Kind::Expansion { basis, coefficients } => {
                basis.evaluate(&to_complex(coefficients), &pts).unwrap_or_else(|_| vec![ZERO; n])
            }
            _ => pts.iter().map(|&t| self.eval(&[t])).collect(),
        }
    }

    /// Closed-form `ĝ(ω)` where one is known.
    pub fn closed_form(&self, w: &[f64]) -> Option<C64> {
        if w.len() != self.dim() {
            return None;
        }
        let s = C64::new(0.0, 2.0 * PI * w[0]);
        match &self.kind {
            Kind::Zero => Some(ZERO),
            Kind::ExpSum(terms) => Some(terms.iter().map(|&(a, b)| a * exp_integral(b - s)).sum()),
            Kind::Ramp => Some(ramp_integral(s)),
            Kind::Expansion { basis, coefficients } => {
                let row = basis.row(w[0]);
                Some(row.iter().zip(coefficients).map(|(u, &c)| u * c).sum())
            }
            Kind::Separable(f, g) => Some(f.closed_form(&w[..1])? * g.closed_form(&w[1..])?),
        }
    }

    /// `ĝ(ω)` by adaptive Gauss–Kronrod quadrature of the evaluator.
    pub fn quadrature(&self, w: &[f64]) -> Result<C64> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: w.len() });
        }
        if let Kind::Separable(f, g) = &self.kind {
            return Ok(f.quadrature(&w[..1])? * g.quadrature(&w[1..])?);
        }
        let om = w[0];
        adaptive_gk(|t| self.eval(&[t]) * C64::from_polar(1.0, -2.0 * PI * om * t), 0.0, 1.0, QUAD_TOL)
    }

    /// Closed form when available, quadrature otherwise.
    pub fn sample(&self, w: &[f64]) -> Result<C64> {
        match self.closed_form(w) {
            Some(v) => Ok(v),
            None => self.quadrature(w),
        }
    }
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639,
    0.949107912342758525,
    0.864864423359769073,
    0.741531185599394440,
    0.586087235467691130,
    0.405845151377397167,
    0.207784955007898468,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022935322010529225,
    0.063092092629978553,
    0.104790010322250184,
    0.140653259715525919,
    0.169004726639267903,
    0.190350578064785410,
    0.204432940075298892,
    0.209482141084727828,
];
/// Gauss weights on the odd-indexed Kronrod nodes, then the centre.
const GK_WG: [f64; 4] = [0.129484966168869693, 0.279705391489276668, 0.381830050505118945, 0.417959183673469388];

/// `(Kronrod estimate, |Kronrod − Gauss|)` on `[a, b]`.
fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += s * GK_WK[i];
        if i % 2 == 1 {
            g += s * GK_WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive bisection until the summed error estimate is below `tol`.
fn adaptive_gk<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> Result<C64> {
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    loop {
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= tol {
            return Ok(parts.iter().map(|p| p.2 .0).sum());
        }
        if parts.len() >= QUAD_MAX_INTERVALS {
            return Err(Error::NotConverged { iterations: parts.len(), residual: err });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.2 .1 > acc.1 { (i, p.2 .1) } else { acc });
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
}

/// `ĝ(ω_i)` for every frequency. 2D frequencies are `(ω_x, ω_y)` pairs.
pub fn continuous_fourier_samples(target: &ContinuousTarget, frequencies: &[Vec<f64>]) -> Result<Vec<C64>> {
    frequencies.iter().map(|w| target.sample(w)).collect()
}

/// `ĝ` on the full 1D candidate grid of `2N` half-integer frequencies.
pub fn grid_samples(target: &ContinuousTarget, half: usize) -> Result<Vec<C64>> {
    frequency_grid(half).iter().map(|&w| target.sample(&[w])).collect()
}

/// DFT-generated samples of a `2N` signal on `[0, 2)`:
/// `ĝ_j = (1/N) Σ_m x_m e^{−πijm/N}`, centered order.
pub fn dft_samples(x: &[C64]) -> Result<Vec<C64>> {
    let two_n = x.len();
    let dft = Dft1::new(two_n, FreqOrdering::Centered)?;
    let s = (two_n as f64).sqrt() / (two_n / 2) as f64;
    Ok(dft.apply(x).into_iter().map(|v| v * s).collect())
}

/// `f_N(t) = ½ Σ_j ĝ(j/2) e^{πijt}` at every `t`. `samples` hold the `2N`
/// grid values in index order.
pub fn truncated_fourier_series(samples: &[C64], t: &[f64]) -> Result<Vec<C64>> {
    if samples.len() % 2 != 0 {
        return Err(Error::invalid("truncated Fourier series needs an even number of samples"));
    }
    let half = samples.len() / 2;
    Ok(t
        .iter()
        .map(|&s| {
            let mut acc = ZERO;
            for (i, &g) in samples.iter().enumerate() {
                if g != ZERO {
                    let j = i as f64 - half as f64;
                    acc += g * C64::from_polar(1.0, PI * j * s);
                }
            }
            acc * 0.5
        })
        .collect())
}

/// `f_N` on `t_m = m/N`, `m < N`.
pub fn truncated_fourier_grid(samples: &[C64]) -> Result<Vec<C64>> {
    let half = samples.len() / 2;
    let t: Vec<f64> = (0..half).map(|m| m as f64 / half as f64).collect();
    truncated_fourier_series(samples, &t)
}

/// `m₀(ξ) = Σ_n h_n e^{−2πinξ}/√2`.
fn m0(h: &[f64], xi: f64) -> C64 {
    h.iter().enumerate().map(|(n, &hn)| C64::from_polar(hn, -2.0 * PI * n as f64 * xi)).sum::<C64>()
        / core::f64::consts::SQRT_2
}

/// `φ̂(ξ 2^{−k})` for `k = 0..=depth`, from `φ̂(η) ≈ e^{−2πiηM₁}` at the
/// deepest scale up through `φ̂(2η) = m₀(η) φ̂(η)`.
fn scaling_ft_ladder(h: &[f64], moment: f64, xi: f64, depth: usize) -> Vec<C64> {
    let mut out = vec![ZERO; depth + 1];
    let deepest = xi / 2f64.powi(depth as i32);
    out[depth] = C64::from_polar(1.0, -2.0 * PI * deepest * moment);
    for k in (0..depth).rev() {
        out[k] = out[k + 1] * m0(h, xi / 2f64.powi(k as i32 + 1));
    }
    out
}

/// One edge of the stationary construction: `Φ(ξ) = (A Φ(ξ/2) + b(ξ/2))/√2`
/// with `A` the edge-to-edge block of the low rows and `b` the interior
/// translates they touch.
#[derive(Debug, Clone)]
struct Edge {
    low: Vec<Vec<f64>>,
    integrals: Vec<f64>,
    h: Vec<f64>,
    moment: f64,
}

impl Edge {
    /// Fourier integrals of the `p` unit-scale boundary scaling functions.
    fn ft(&self, xi: f64, depth: usize) -> Vec<C64> {
        let p = self.integrals.len();
        let phi = scaling_ft_ladder(&self.h, self.moment, xi, depth);
        let mut v: Vec<C64> = self.integrals.iter().map(|&m| C64::new(m, 0.0)).collect();
        let mut next = vec![ZERO; p];
        for k in (1..=depth).rev() {
            let eta = xi / 2f64.powi(k as i32);
            for (r, row) in self.low.iter().enumerate() {
                let mut acc: C64 = (0..p).map(|t| v[t] * row[t]).sum();
                for (t, &w) in row.iter().enumerate().skip(p) {
                    acc += C64::from_polar(w, -2.0 * PI * eta * (t as f64 - p as f64 + 1.0)) * phi[k];
                }
                next[r] = acc / core::f64::consts::SQRT_2;
            }
            core::mem::swap(&mut v, &mut next);
        }
        v
    }
}

fn moment_of(h: &[f64]) -> f64 {
    h.iter().enumerate().map(|(n, &v)| n as f64 * v).sum::<f64>() / core::f64::consts::SQRT_2
}

/// Default dyadic depth `2^{−L}` at which the Fourier-domain cascade stops.
pub const DEFAULT_CASCADE_LEVEL: usize = 52;
/// Resolution `2^L` of the spatial cascade used for point evaluation.
pub const DEFAULT_EVAL_LEVEL: usize = 14;

/// The `K` wavelet functions on `[0, 1]` of a boundary-corrected transform
/// with stationary edge rows.
///
/// Level-`J` scaling functions (`K = 2^J`) are interior translates
/// `2^{J/2} φ(2^J t − m + p − 1)` and `p` boundary functions per edge; the
/// basis is their image under the size-`K` transform. Fourier integrals come
/// from the refinement equations, stopped at scale `2^{−cascade_level}`.
#[derive(Debug, Clone)]
pub struct WaveletBasis {
    spec: WaveletSpec,
    k: usize,
    j: usize,
    cascade_level: usize,
    eval_level: usize,
    coarse: Dwt1,
    h: Vec<f64>,
    moment: f64,
    edges: Option<(Edge, Edge)>,
}

impl WaveletBasis {
    /// `spec` applies at length `k`; periodic edges are only accepted for Haar.
    pub fn new(spec: WaveletSpec, k: usize) -> Result<Self> {
        Self::with_levels(spec, k, DEFAULT_CASCADE_LEVEL, DEFAULT_EVAL_LEVEL)
    }

    pub fn with_levels(spec: WaveletSpec, k: usize, cascade_level: usize, eval_level: usize) -> Result<Self> {
        spec.validate(k)?;
        let p = spec.order;
        if spec.mode == BoundaryMode::Periodic && p > 1 {
            return Err(Error::invalid("continuous bases need boundary-corrected wavelets"));
        }
        let j = k.trailing_zeros() as usize;
        if cascade_level < j || cascade_level > 1000 {
            return Err(Error::invalid("cascade level must lie in log₂K..=1000"));
        }
        if eval_level < j || eval_level > 24 {
            return Err(Error::invalid("evaluation level must lie in log₂K..=24"));
        }
        let coarse = Dwt1::stationary(k, spec)?;
        let h = filters::lowpass(p).expect("validated order").to_vec();
        let moment = moment_of(&h);
        let edges = if p > 1 {
            let se = StationaryEdges::new(p)?;
            let side = |low: &crate::linalg::RMat, values: &crate::linalg::RMat, h: Vec<f64>| Edge {
                low: (0..p).map(|r| low.row(r).to_vec()).collect(),
                integrals: (0..p).map(|r| values[(r, 0)]).collect(),
                moment: moment_of(&h),
                h,
            };
            let hr: Vec<f64> = h.iter().rev().copied().collect();
            Some((side(&se.left_low, &se.left_values, h.clone()), side(&se.right_low, &se.right_values, hr)))
        } else {
            None
        };
        Ok(WaveletBasis { spec, k, j, cascade_level, eval_level, coarse, h, moment, edges })
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn spec(&self) -> WaveletSpec {
        self.spec
    }

    pub fn cascade_level(&self) -> usize {
        self.cascade_level
    }

    /// `∫ φ_{J,m}(t) e^{−2πiωt} dt` for the level-`J` scaling functions.
    pub fn scaling_row(&self, omega: f64) -> Vec<C64> {
        let p = self.spec.order;
        let kk = self.k;
        let scale = kk as f64;
        let xi = omega / scale;
        let depth = self.cascade_level - self.j;
        let amp = scale.sqrt().recip();
        let phi0 = scaling_ft_ladder(&self.h, self.moment, xi, depth)[0] * amp;
        let mut row: Vec<C64> = (0..kk)
            .map(|m| phi0 * C64::from_polar(1.0, -2.0 * PI * xi * (m as f64 - p as f64 + 1.0)))
            .collect();
        if let Some((left, right)) = &self.edges {
            for (r, v) in left.ft(xi, depth).into_iter().enumerate() {
                row[r] = v * amp;
            }
            // Mirrored: ∫ g(1 − t) e^{−2πiωt} dt = e^{−2πiω} ĝ(−ω).
            let turn = C64::from_polar(amp, -2.0 * PI * omega);
            for (r, v) in right.ft(-xi, depth).into_iter().enumerate() {
                row[kk - 1 - r] = v * turn;
            }
        }
        row
    }

    /// `∫ φ_k(t) e^{−2πiωt} dt` for every basis function.
    pub fn row(&self, omega: f64) -> Vec<C64> {
        self.coarse.apply(&self.scaling_row(omega))
    }

    /// Level-`eval_level` scaling coefficients of `Σ z_k φ_k`.
    pub fn fine_coefficients(&self, z: &[C64]) -> Result<Vec<C64>> {
        let n = 1usize << self.eval_level;
        let fine = Dwt1::stationary(n, WaveletSpec { levels: self.eval_level - self.j, ..self.spec })?;
        let mut head = self.coarse.adjoint(z);
        head.resize(n, ZERO);
        Ok(fine.adjoint(&head))
    }

    /// `Σ z_k φ_k(t)` at every `t` from the fine coefficients:
    /// `2^{L/2} c_i ≈ f((i − p + 1 + M₁)/2^L)` for interior `i`, linear in
    /// between. Points within `p` fine cells of an edge take the nearest
    /// interior value.
    pub fn evaluate(&self, z: &[C64], t: &[f64]) -> Result<Vec<C64>> {
        let c = self.fine_coefficients(z)?;
        let n = c.len();
        let p = self.spec.order;
        let amp = (n as f64).sqrt();
        let shift = p as f64 - 1.0 - self.moment;
        let (lo, hi) = if p > 1 { (p as f64, (n - 1 - p) as f64) } else { (0.0, (n - 1) as f64) };
        Ok(t.iter()
            .map(|&s| {
                if !(0.0..=1.0).contains(&s) {
                    return ZERO;
                }
                let u = (s * n as f64 + shift).clamp(lo, hi);
                let i = (u.floor() as usize).min(n - 2);
                let w = u - i as f64;
                (c[i] * (1.0 - w) + c[i + 1] * w) * amp
            })
            .collect())
    }

    /// `Σ z_k φ_k` on `t_m = m/n`, `m < n`.
    pub fn evaluate_grid(&self, z: &[C64], n: usize) -> Result<Vec<C64>> {
        let t: Vec<f64> = (0..n).map(|m| m as f64 / n as f64).collect();
        self.evaluate(z, &t)
    }
}

/// Quadrature parameters recorded with a slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMeta {
    pub wavelet: WaveletSpec,
    pub k: usize,
    pub cascade_level: usize,
    /// `N` of the `2N` candidate grid.
    pub half: usize,
    /// Candidate indices of the rows.
    pub rows: Vec<usize>,
}

/// `P_Ω U P_K`: `⟨φ_k, e_ω⟩` for the sampled candidate frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisMatrixSlice {
    pub meta: SliceMeta,
    /// Row-major `rows × K`.
    pub entries: Vec<C64>,
}

impl SynthesisMatrixSlice {
    pub fn rows(&self) -> usize {
        self.meta.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.meta.k
    }

    pub fn entry(&self, r: usize, k: usize) -> C64 {
        self.entries[r * self.meta.k + k]
    }

    pub fn operator(&self) -> Result<Operator> {
        Ok(Arc::new(MatrixOperator::new(self.rows(), self.cols(), self.entries.clone())?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.rows() * self.cols() {
            return Err(Error::DimensionMismatch { expected: self.rows() * self.cols(), found: self.entries.len() });
        }
        if self.meta.rows.iter().any(|&r| r >= 2 * self.meta.half) {
            return Err(Error::invalid("slice row outside the candidate grid"));
        }
        Ok(())
    }
}

/// The rows `rows` (candidate indices on the `2N` grid) of `U`. Rows at `ω`
/// and `−ω` are conjugate, so each frequency magnitude is computed once.
pub fn build_synthesis_slice(basis: &WaveletBasis, half: usize, rows: &[usize]) -> Result<SynthesisMatrixSlice> {
    let k = basis.len();
    let mut entries = vec![ZERO; rows.len() * k];
    let mut done: Vec<Option<usize>> = vec![None; 2 * half + 1];
    for (r, &i) in rows.iter().enumerate() {
        if i >= 2 * half {
            return Err(Error::invalid("slice row outside the candidate grid"));
        }
        let j = i as i64 - half as i64;
        let key = j.unsigned_abs() as usize;
        let out = r * k;
        match done[key] {
            Some(prev) => {
                let (pj, same) = (rows[prev] as i64 - half as i64, rows[prev] == i);
                for c in 0..k {
                    let v = entries[prev * k + c];
                    entries[out + c] = if same || pj == j { v } else { v.conj() };
                }
            }
            None => {
                let row = basis.row(j as f64 / 2.0);
                entries[out..out + k].copy_from_slice(&row);
                done[key] = Some(r);
            }
        }
    }
    Ok(SynthesisMatrixSlice {
        meta: SliceMeta { wavelet: basis.spec(), k, cascade_level: basis.cascade_level(), half, rows: rows.to_vec() },
        entries,
    })
}

/// Outcome of one reconstruction, judged on `t_m = m/N`.
#[derive(Debug, Clone)]
pub struct InfdimRecovery {
    pub result: Option<RecoveryResult>,
    /// Real part of the reconstruction on the evaluation grid.
    pub values: Vec<f64>,
    /// Percent relative ℓ² error against the target on the same grid.
    pub error: Option<f64>,
}

fn judge(values: Vec<C64>, truth: Option<&[f64]>) -> Result<(Vec<f64>, Option<f64>)> {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let err = match truth {
        Some(t) if t.len() == re.len() => Some(relative_error_percent(&re, t)),
        Some(t) => return Err(Error::DimensionMismatch { expected: re.len(), found: t.len() }),
        None => None,
    };
    Ok((re, err))
}

/// `min ‖z‖₁` subject to `‖P_Ω U P_K z − P_Ω ĝ‖ ≤ η`; the reconstruction is
/// `Σ z_k φ_k` on `grid` points `t_m = m/grid`.
#[allow(clippy::too_many_arguments)]
pub fn solve_infdim(
    samples: &[C64],
    slice: &SynthesisMatrixSlice,
    basis: &WaveletBasis,
    eta: f64,
    controls: SolverControls,
    grid: usize,
    truth: Option<&[f64]>,
) -> Result<InfdimRecovery> {
    slice.validate()?;
    if basis.len() != slice.cols() || basis.spec() != slice.meta.wavelet {
        return Err(Error::invalid("slice was built for a different basis"));
    }
    let op = slice.operator()?;
    let mut problem = RecoveryProblem {
        operator: op,
        rows: (0..slice.rows()).collect(),
        measurements: samples.to_vec(),
        eta,
        regularizer: Regularizer::L1,
        controls,
        synthesis: None,
        ground_truth: None,
    };
    problem.validate()?;
    problem.controls.log_every = 0;
    let result = solve(&problem)?;
    let (values, error) = judge(basis.evaluate_grid(&result.estimate, grid)?, truth)?;
    Ok(InfdimRecovery { result: Some(result), values, error })
}

/// `U = DFT · W⁻¹` on the `2N` grid of `[0, 2)`, in the units of `ĝ`:
/// `ĝ ≈ √(2/N) U x`.
pub fn discrete_operator(half: usize, wavelet: WaveletSpec) -> Result<(Operator, Operator)> {
    let n = 2 * half;
    let dwt: Operator = Arc::new(Dwt1::new(n, wavelet)?);
    let dft: Operator = Arc::new(Dft1::new(n, FreqOrdering::Centered)?);
    let synthesis: Operator = Arc::new(Adjoint(dwt));
    Ok((compose(vec![dft, synthesis.clone()])?, synthesis))
}

/// Discrete CS: `min ‖z‖₁` subject to `‖P_Ω DFT W⁻¹ z − s P_Ω ĝ‖ ≤ s η`
/// with `s = √(N/2)`; the first `N` entries of `W⁻¹ z` are the reconstruction.
pub fn discrete_cs(
    samples: &[C64],
    map: &SamplingMap,
    wavelet: WaveletSpec,
    eta: f64,
    controls: SolverControls,
    truth: Option<&[f64]>,
) -> Result<InfdimRecovery> {
    let two_n = map.mask.len();
    if two_n % 2 != 0 {
        return Err(Error::invalid("candidate grid must have even length"));
    }
    let half = two_n / 2;
    let (op, synthesis) = discrete_operator(half, wavelet)?;
    let s = (half as f64 / 2.0).sqrt();
    let mut problem = RecoveryProblem::new(op, map, samples.iter().map(|v| v * s).collect(), eta * s);
    problem.controls = controls;
    problem.controls.log_every = 0;
    problem.synthesis = Some(synthesis);
    let result = solve(&problem)?;
    let (values, error) = judge(result.reconstruction[..half].to_vec(), truth)?;
    Ok(InfdimRecovery { result: Some(result), values, error })
}

/// Linear reconstruction: `f_M` from the `count` lowest-|ω| grid samples.
pub fn linear_reconstruction(grid: &[C64], count: usize, truth: Option<&[f64]>) -> Result<InfdimRecovery> {
    let two_n = grid.len();
    let half = two_n / 2;
    let mut order: Vec<usize> = (0..two_n).collect();
    order.sort_by_key(|&i| ((i as i64 - half as i64).abs(), i));
    let mut kept = vec![ZERO; two_n];
    for &i in order.iter().take(count.min(two_n)) {
        kept[i] = grid[i];
    }
    let (values, error) = judge(truncated_fourier_grid(&kept)?, truth)?;
    Ok(InfdimRecovery { result: None, values, error })
}

#[derive(Debug, Clone)]
pub struct CrimeBaselines {
    pub linear: InfdimRecovery,
    pub discrete: InfdimRecovery,
}

/// The linear baseline (same sample count, lowest frequencies) and discrete CS
/// fed the continuous samples on `Ω`.
pub fn crime_baselines(
    target: &ContinuousTarget,
    map: &SamplingMap,
    wavelet: WaveletSpec,
    eta: f64,
    controls: SolverControls,
) -> Result<CrimeBaselines> {
    if target.dim() != 1 {
        return Err(Error::invalid("baselines are 1D"));
    }
    let half = map.mask.len() / 2;
    let grid = grid_samples(target, half)?;
    let truth: Vec<f64> = target.grid_values(half).iter().map(|v| v.re).collect();
    let linear = linear_reconstruction(&grid, map.m(), Some(&truth))?;
    let sampled: Vec<C64> = map.indices().iter().map(|&i| grid[i]).collect();
    let discrete = discrete_cs(&sampled, map, wavelet, eta, controls, Some(&truth))?;
    Ok(CrimeBaselines { linear, discrete })
}

/// One run of the three reconstructions on a 1D target.
#[derive(Debug, Clone)]
pub struct InfdimComparison {
    pub infdim: InfdimRecovery,
    pub discrete: InfdimRecovery,
    pub linear: InfdimRecovery,
    pub truth: Vec<f64>,
    /// `f_N` from all `2N` samples.
    pub full_series: Vec<f64>,
}

/// Samples `target` on `Ω ⊂` the `2N` grid and recovers it three ways.
#[allow(clippy::too_many_arguments)]
pub fn compare_1d(
    target: &ContinuousTarget,
    map: &SamplingMap,
    basis: &WaveletBasis,
    discrete_wavelet: WaveletSpec,
    eta: f64,
    controls: SolverControls,
) -> Result<InfdimComparison> {
    if !matches!(map.shape, Shape::D1(_)) {
        return Err(Error::invalid("the comparison needs a 1D map"));
    }
    let half = map.mask.len() / 2;
    let grid = grid_samples(target, half)?;
    let truth: Vec<f64> = target.grid_values(half).iter().map(|v| v.re).collect();
    let rows = map.indices();
    let sampled: Vec<C64> = rows.iter().map(|&i| grid[i]).collect();
    let slice = build_synthesis_slice(basis, half, &rows)?;
    let infdim = solve_infdim(&sampled, &slice, basis, eta, controls, half, Some(&truth))?;
    let discrete = discrete_cs(&sampled, map, discrete_wavelet, eta, controls, Some(&truth))?;
    let linear = linear_reconstruction(&grid, map.m(), Some(&truth))?;
    let full_series = truncated_fourier_grid(&grid)?.iter().map(|v| v.re).collect();
    Ok(InfdimComparison { infdim, discrete, linear, truth, full_series })
}

/// `Z ↦ V Z Vᵀ`: Fourier integrals on the `2N × 2N` candidate grid of the
/// tensor basis `φ_k(x) φ_l(y)`. `Z` is row-major `K × K` with rows indexed
/// by `l`; grid rows are `ω_y`, columns `ω_x`.
#[derive(Debug, Clone)]
pub struct TensorSlice {
    /// `2N × K`, row-major: the full 1D slice.
    v: Vec<C64>,
    m: usize,
    k: usize,
}

impl TensorSlice {
    pub fn new(slice: &SynthesisMatrixSlice) -> Result<Self> {
        slice.validate()?;
        let full: Vec<usize> = (0..2 * slice.meta.half).collect();
        if slice.meta.rows != full {
            return Err(Error::invalid("a tensor slice needs every candidate row"));
        }
        Ok(TensorSlice { v: slice.entries.clone(), m: slice.rows(), k: slice.cols() })
    }

    /// `out (a × c) = A (a × b) · Bᵀ` with `B (c × b)`, optionally conjugated.
    fn mul_bt(a: &[C64], b: &[C64], rows: usize, inner: usize, cols: usize, conj_b: bool, out: &mut [C64]) {
        for i in 0..rows {
            let ar = &a[i * inner..(i + 1) * inner];
            for j in 0..cols {
                let br = &b[j * inner..(j + 1) * inner];
                out[i * cols + j] = if conj_b {
                    ar.iter().zip(br).map(|(x, y)| x * y.conj()).sum()
                } else {
                    ar.iter().zip(br).map(|(x, y)| x * y).sum()
                };
            }
        }
    }

    fn transpose(x: &[C64], rows: usize, cols: usize) -> Vec<C64> {
        let mut t = vec![ZERO; x.len()];
        for i in 0..rows {
            for j in 0..cols {
                t[j * rows + i] = x[i * cols + j];
            }
        }
        t
    }
}

impl LinearOperator for TensorSlice {
    fn dim_in(&self) -> usize {
        self.k * self.k
    }
    fn dim_out(&self) -> usize {
        self.m * self.m
    }
    fn apply_into(&self, z: &[C64], out: &mut [C64]) {
        let (m, k) = (self.m, self.k);
        // T = Z Vᵀ (K × M), then G = V T = (Tᵀ Vᵀ)ᵀ.
        let mut t = vec![ZERO; k * m];
        Self::mul_bt(z, &self.v, k, k, m, false, &mut t);
        let tt = Self::transpose(&t, k, m);
        let mut g = vec![ZERO; m * m];
        Self::mul_bt(&tt, &self.v, m, k, m, false, &mut g);
        out.copy_from_slice(&Self::transpose(&g, m, m));
    }
    fn adjoint_into(&self, g: &[C64], out: &mut [C64]) {
        let (m, k) = (self.m, self.k);
        // Z = Vᴴ G V̄: S = G V̄ (M × K), then Z = Vᴴ S = (Sᵀ V̄)ᵀ.
        let vt = Self::transpose(&self.v, m, k);
        let mut s = vec![ZERO; m * k];
        Self::mul_bt(g, &vt, m, m, k, true, &mut s);
        let st = Self::transpose(&s, m, k);
        let mut z = vec![ZERO; k * k];
        Self::mul_bt(&st, &vt, k, m, k, true, &mut z);
        out.copy_from_slice(&Self::transpose(&z, k, k));
    }
    fn name(&self) -> String {
        alloc::format!("tensor_slice[{}x{}]", self.m, self.k)
    }
}

/// `φ_k(t_m)` on `t_m = m/n`, row-major `n × K`.
pub fn evaluation_matrix(basis: &WaveletBasis, n: usize) -> Result<Vec<f64>> {
    let k = basis.len();
    let mut e = vec![0.0; n * k];
    let mut z = vec![ZERO; k];
    for c in 0..k {
        z[c] = C64::new(1.0, 0.0);
        for (m, v) in basis.evaluate_grid(&z, n)?.into_iter().enumerate() {
            e[m * k + c] = v.re;
        }
        z[c] = ZERO;
    }
    Ok(e)
}

/// Grid values `E Z Eᵀ` of `Σ Z_{lk} φ_k(x) φ_l(y)` with `E` from
/// [`evaluation_matrix`]; rows are `y`.
pub fn tensor_values(e: &[f64], n: usize, k: usize, z: &[C64]) -> Vec<f64> {
    let mut t = vec![0.0; k * n];
    for l in 0..k {
        for m in 0..n {
            t[l * n + m] = (0..k).map(|c| z[l * k + c].re * e[m * k + c]).sum();
        }
    }
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for m in 0..n {
            out[r * n + m] = (0..k).map(|l| e[r * k + l] * t[l * n + m]).sum();
        }
    }
    out
}

/// `ĝ` on the `2N × 2N` candidate grid of a 2D target, row-major with rows
/// `ω_y`. Separable targets reuse their 1D factors.
pub fn grid_samples_2d(target: &ContinuousTarget, half: usize) -> Result<Vec<C64>> {
    let w = frequency_grid(half);
    let m = w.len();
    if let Kind::Separable(f, g) = &target.kind {
        let fx = grid_samples(f, half)?;
        let gy = grid_samples(g, half)?;
        let mut out = vec![ZERO; m * m];
        for r in 0..m {
            for c in 0..m {
                out[r * m + c] = fx[c] * gy[r];
            }
        }
        return Ok(out);
    }
    let mut out = Vec::with_capacity(m * m);
    for &wy in &w {
        for &wx in &w {
            out.push(target.sample(&[wx, wy])?);
        }
    }
    Ok(out)
}

/// 2D values `f(x_c, y_r)` on the `n × n` grid, rows `y`.
pub fn grid_values_2d(target: &ContinuousTarget, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            out.push(target.eval(&[c as f64 / n as f64, r as f64 / n as f64]).re);
        }
    }
    out
}

/// The three reconstructions of a 2D target from samples on a `2N × 2N` map.
/// Long-running at realistic sizes: one iteration costs `O(N K²)`.
pub fn compare_2d(
    target: &ContinuousTarget,
    map: &SamplingMap,
    basis: &WaveletBasis,
    discrete_wavelet: WaveletSpec,
    eta: f64,
    controls: SolverControls,
) -> Result<InfdimComparison> {
    let two_n = match map.shape {
        Shape::D2(s) => s,
        Shape::D1(_) => return Err(Error::invalid("the 2D comparison needs a 2D map")),
    };
    let half = two_n / 2;
    let grid = grid_samples_2d(target, half)?;
    let truth = grid_values_2d(target, half);
    let rows = map.indices();
    let sampled: Vec<C64> = rows.iter().map(|&i| grid[i]).collect();

    let full: Vec<usize> = (0..two_n).collect();
    let slice = build_synthesis_slice(basis, half, &full)?;
    let op: Operator = Arc::new(TensorSlice::new(&slice)?);
    let mut problem = RecoveryProblem::new(op, map, sampled.clone(), eta);
    problem.controls = controls;
    problem.controls.log_every = 0;
    let result = solve(&problem)?;
    let e = evaluation_matrix(basis, half)?;
    let values = tensor_values(&e, half, basis.len(), &result.estimate);
    let infdim = InfdimRecovery { error: Some(relative_error_percent(&values, &truth)), result: Some(result), values };

    // Discrete: 2D DFT · W⁻¹ on [0, 2)², ĝ ≈ (2/N)·U x; keep the [0, 1)² block.
    let dwt: Operator = Arc::new(crate::transforms::Dwt2::new(two_n, discrete_wavelet)?);
    let dft: Operator = Arc::new(crate::transforms::Dft2::new(two_n, FreqOrdering::Centered)?);
    let synthesis: Operator = Arc::new(Adjoint(dwt));
    let s = half as f64 / 2.0;
    let mut problem = RecoveryProblem::new(
        compose(vec![dft, synthesis.clone()])?,
        map,
        sampled.iter().map(|v| v * s).collect(),
        eta * s,
    );
    problem.controls = controls;
    problem.controls.log_every = 0;
    problem.synthesis = Some(synthesis);
    let result = solve(&problem)?;
    let block: Vec<f64> =
        (0..half).flat_map(|r| (0..half).map(move |c| (r, c))).map(|(r, c)| result.reconstruction[r * two_n + c].re).collect();
    let discrete = InfdimRecovery { error: Some(relative_error_percent(&block, &truth)), result: Some(result), values: block };

    // Linear: the map.m() lowest-radius samples, ¼ Σ ĝ e^{πi(jx + ky)}.
    let mut order: Vec<usize> = (0..two_n * two_n).collect();
    let radius = |i: usize| {
        let (r, c) = ((i / two_n) as i64 - half as i64, (i % two_n) as i64 - half as i64);
        r * r + c * c
    };
    order.sort_by_key(|&i| (radius(i), i));
    let mut kept = vec![ZERO; two_n * two_n];
    for &i in order.iter().take(map.m()) {
        kept[i] = grid[i];
    }
    let series = |g: &[C64]| -> Vec<f64> {
        // Separable evaluation: rows first, then columns.
        let basis_1d: Vec<C64> = (0..half)
            .flat_map(|m| (0..two_n).map(move |i| (m, i)))
            .map(|(m, i)| C64::from_polar(0.5, PI * (i as f64 - half as f64) * m as f64 / half as f64))
            .collect();
        let mut t = vec![ZERO; two_n * half];
        for r in 0..two_n {
            for m in 0..half {
                t[r * half + m] = (0..two_n).map(|c| g[r * two_n + c] * basis_1d[m * two_n + c]).sum();
            }
        }
        let mut out = vec![0.0; half * half];
        for mr in 0..half {
            for m in 0..half {
                out[mr * half + m] = (0..two_n).map(|r| basis_1d[mr * two_n + r] * t[r * half + m]).sum::<C64>().re;
            }
        }
        out
    };
    let lin = series(&kept);
    let linear = InfdimRecovery { error: Some(relative_error_percent(&lin, &truth)), result: None, values: lin };
    let full_series = series(&grid);
    Ok(InfdimComparison { infdim, discrete, linear, truth, full_series })
}

/// Defaults of the 1D desk experiment; `dims = 2` selects the tensor
/// configuration on a `2N × 2N` candidate grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InfdimConfig {
    pub dims: usize,
    /// `N`: evaluation grid size and half the candidate grid per axis.
    pub half: usize,
    /// Truncation `K`.
    pub k: usize,
    pub order: usize,
    pub fraction: f64,
    pub map: crate::sampling::AllRoundSpec,
    pub cascade_level: usize,
    pub eta: f64,
    pub controls: SolverControls,
}

impl Default for InfdimConfig {
    fn default() -> Self {
        InfdimConfig {
            dims: 1,
            half: 512,
            k: 512,
            order: 6,
            fraction: 0.0625,
            map: crate::sampling::AllRoundSpec { n: 20, m_radius: 0.02, a: 2.0, b: 0.0 },
            cascade_level: DEFAULT_CASCADE_LEVEL,
            eta: 0.0,
            controls: SolverControls {
                max_iterations: 3000,
                tolerance: 1e-7,
                real: true,
                log_every: 0,
                ..SolverControls::default()
            },
        }
    }
}

impl InfdimConfig {
    /// Boundary wavelets at the deepest valid depth for `K`.
    pub fn basis(&self) -> Result<WaveletBasis> {
        let levels = WaveletSpec::max_levels(self.order, BoundaryMode::Boundary, self.k);
        WaveletBasis::with_levels(WaveletSpec::boundary(self.order, levels), self.k, self.cascade_level, DEFAULT_EVAL_LEVEL)
    }

    /// Periodic wavelets at the deepest valid depth on the candidate grid.
    pub fn discrete_wavelet(&self) -> WaveletSpec {
        WaveletSpec::periodic(self.order, WaveletSpec::max_levels(self.order, BoundaryMode::Periodic, 2 * self.half))
    }

    /// The all-round map at `fraction`, calibrated on the candidate grid.
    pub fn sampling_map(&self, seed: u64) -> Result<SamplingMap> {
        let two_d = match self.dims {
            1 => false,
            2 => true,
            _ => return Err(Error::invalid("infdim runs in 1 or 2 dimensions")),
        };
        let b = crate::sampling::calibrate_fraction(self.map, self.fraction, two_d)?;
        let spec = crate::sampling::AllRoundSpec { b, ..self.map };
        let shape = if two_d { Shape::D2(2 * self.half) } else { Shape::D1(2 * self.half) };
        crate::sampling::all_round_map(shape, spec, seed)
    }

    pub fn run(&self, target: &ContinuousTarget, seed: u64) -> Result<InfdimComparison> {
        let map = self.sampling_map(seed)?;
        let basis = self.basis()?;
        if self.dims == 2 {
            compare_2d(target, &map, &basis, self.discrete_wavelet(), self.eta, self.controls)
        } else {
            compare_1d(target, &map, &basis, self.discrete_wavelet(), self.eta, self.controls)
        }
    }
}
