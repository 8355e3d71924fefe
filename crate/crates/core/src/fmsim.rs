//! Compressive fluorescence microscopy: binary Hadamard illumination, a disc
//! low-pass lens response, Poisson photon counts and recovery from corrected
//! counts.
//!
//! Counts live in photon units. With `H = N Ψ` the ±1 sequency Hadamard
//! matrix on `N × N` images and `J` the all-ones matrix, the illumination
//! patterns are `Ψ_m,raw = (H + J)/2 = N Ψ_m`, where `Ψ_m = (Ψ + 𝟙)/2` and
//! `𝟙 = J/N`. The lens blurs every pattern with `B = F* P_psf F` before it
//! reaches the sample, so the counts are `Ψ_m,raw B x`. `B` keeps the DC
//! component, hence `J B = J` and `2y − y₁ = H B x` before noise.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::to_complex;
use crate::rng::seeded;
use crate::sampling::{half_half_map, IndexOrdering, SamplingMap};
use crate::signal::Shape;
use crate::solvers::{relative_error_real, solve, RecoveryProblem, RecoveryResult, Regularizer, SolverControls};
use crate::transforms::{
    compose, Adjoint, Dft2, Dwt2, FreqOrdering, Hadamard2, HadamardOrdering, LinearOperator, Operator,
    WaveletSpec,
};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Photons under the all-ones pattern for an all-white scene.
pub const DEFAULT_BUDGET: f64 = 1e6;
pub const DEFAULT_CUTOFF: f64 = 0.2;

/// Disc low-pass filter; `cutoff` is the frequency radius normalised so the
/// Nyquist frequency on each axis is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsfSpec {
    pub cutoff: f64,
}

impl Default for PsfSpec {
    fn default() -> Self {
        PsfSpec { cutoff: DEFAULT_CUTOFF }
    }
}

impl PsfSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff <= core::f64::consts::SQRT_2 + 1e-12) {
            return Err(Error::invalid("PSF cutoff must lie in (0, √2]"));
        }
        Ok(())
    }

    /// Pass band on the natural-order 2D DFT grid.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let half = (n / 2) as f64;
        let f = |i: usize| FreqOrdering::Natural.frequency(n, i) as f64 / half;
        (0..n * n)
            .map(|i| {
                let (a, b) = (f(i / n), f(i % n));
                (a * a + b * b).sqrt() <= self.cutoff + 1e-12
            })
            .collect()
    }

    pub fn operator(&self, n: usize) -> Result<PsfFilter> {
        self.validate()?;
        Ok(PsfFilter { n, mask: self.mask(n), dft: Dft2::new(n, FreqOrdering::Natural)? })
    }
}

/// `B = F* P_psf F`, an orthogonal projection.
#[derive(Debug, Clone)]
pub struct PsfFilter {
    n: usize,
    mask: Vec<bool>,
    dft: Dft2,
}

impl PsfFilter {
    pub fn pass_band(&self) -> &[bool] {
        &self.mask
    }
}

impl LinearOperator for PsfFilter {
    fn dim_in(&self) -> usize {
        self.n * self.n
    }
    fn dim_out(&self) -> usize {
        self.n * self.n
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let mut spec = self.dft.apply(x);
        for (v, &keep) in spec.iter_mut().zip(&self.mask) {
            if !keep {
                *v = ZERO;
            }
        }
        self.dft.adjoint_into(&spec, out);
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        self.apply_into(y, out);
    }
    fn name(&self) -> String {
        alloc::format!("psf[{}:{}]", self.n, self.mask.iter().filter(|&&b| b).count())
    }
}

/// `Ψ_m = (Ψ + 𝟙)/2` with `Ψ` the unitary sequency Hadamard transform and
/// `𝟙 x = (Σx / N)` in every entry.
#[derive(Debug, Clone)]
pub struct PatternOperator {
    n: usize,
    had: Hadamard2,
}

impl PatternOperator {
    pub fn new(n: usize) -> Result<Self> {
        Ok(PatternOperator { n, had: Hadamard2::new(n, HadamardOrdering::Sequency)? })
    }

    fn mix(&self, base: Vec<C64>, src: &[C64], out: &mut [C64]) {
        let s: C64 = src.iter().sum::<C64>() / self.n as f64;
        for (o, b) in out.iter_mut().zip(base) {
            *o = (b + s) * 0.5;
        }
    }
}

impl LinearOperator for PatternOperator {
    fn dim_in(&self) -> usize {
        self.n * self.n
    }
    fn dim_out(&self) -> usize {
        self.n * self.n
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        self.mix(self.had.apply(x), x, out);
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        self.mix(self.had.adjoint(y), y, out);
    }
    fn name(&self) -> String {
        alloc::format!("patterns[{}]", self.n)
    }
}

/// Counts over a sequency-Hadamard map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub counts: Vec<u64>,
    pub omega: SamplingMap,
    /// Position of sequency index 0 within `omega.indices()`.
    pub ones_row_index: usize,
    /// Noiseless means.
    pub gamma: Vec<f64>,
}

impl MeasurementSet {
    pub fn validate(&self) -> Result<()> {
        let rows = self.omega.indices();
        if self.counts.len() != rows.len() || self.gamma.len() != rows.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), found: self.counts.len() });
        }
        if rows.get(self.ones_row_index) != Some(&0) {
            return Err(Error::invalid("the all-ones pattern is not among the measurements"));
        }
        Ok(())
    }
}

/// Adds sequency index 0 (the all-ones pattern) when missing.
pub fn ensure_ones_row(mut map: SamplingMap) -> SamplingMap {
    if !map.mask[0] {
        map.mask[0] = true;
        if let Some(c) = map.level_counts.first_mut() {
            *c += 1;
        }
    }
    map
}

fn side(x: &[f64], map: &SamplingMap) -> Result<usize> {
    let n = match map.shape {
        Shape::D2(n) => n,
        Shape::D1(_) => return Err(Error::invalid("the microscope model is two-dimensional")),
    };
    if x.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: x.len() });
    }
    Ok(n)
}

/// Photons per unit intensity per pixel.
pub fn photon_scale(n: usize, budget: f64) -> f64 {
    budget / (n * n) as f64
}

/// `γ = ⌊|P_Ω Ψ_m,raw B x_s|⌋` with `x_s = x · budget / N²`.
pub fn forward_model(x: &[f64], psf: PsfSpec, omega: &SamplingMap, budget: f64) -> Result<Vec<f64>> {
    let n = side(x, omega)?;
    if x.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::invalid("intensities must be finite and nonnegative"));
    }
    if !(budget > 0.0) {
        return Err(Error::invalid("photon budget must be positive"));
    }
    let xs: Vec<f64> = x.iter().map(|v| v * photon_scale(n, budget)).collect();
    let blurred = psf.operator(n)?.apply(&to_complex(&xs));
    let raw = PatternOperator::new(n)?.apply(&blurred);
    Ok(omega.indices().into_iter().map(|i| (raw[i].norm() * n as f64).floor()).collect())
}

/// Independent Poisson draws with means `gamma`.
pub fn poisson_sample(gamma: &[f64], seed: u64) -> Result<Vec<u64>> {
    let mut rng = seeded(seed);
    gamma
        .iter()
        .map(|&g| {
            if g == 0.0 {
                Ok(0)
            } else if g > 0.0 && g.is_finite() {
                let d = Poisson::new(g).map_err(|_| Error::invalid("bad Poisson mean"))?;
                Ok(d.sample(&mut rng) as u64)
            } else {
                Err(Error::invalid("Poisson means must be finite and nonnegative"))
            }
        })
        .collect()
}

/// Forward model on `ensure_ones_row(omega)`, plus Poisson noise unless
/// `noise_seed` is `None`.
pub fn acquire(x: &[f64], psf: PsfSpec, omega: SamplingMap, budget: f64, noise_seed: Option<u64>) -> Result<MeasurementSet> {
    let omega = ensure_ones_row(omega);
    let gamma = forward_model(x, psf, &omega, budget)?;
    let counts = match noise_seed {
        Some(seed) => poisson_sample(&gamma, seed)?,
        None => gamma.iter().map(|&g| g as u64).collect(),
    };
    Ok(MeasurementSet { counts, omega, ones_row_index: 0, gamma })
}

/// `y′_i = 2 y_i − y₁`, an estimate of `P_Ω H B x_s` in photon units.
pub fn correct_measurements(y: &MeasurementSet) -> Result<Vec<f64>> {
    y.validate()?;
    let y1 = y.counts[y.ones_row_index] as f64;
    Ok(y.counts.iter().map(|&c| 2.0 * c as f64 - y1).collect())
}

/// Noise level of `y′ / N`: `E‖(2e_i − e_1)_i‖² = Σ_{i≠1} (4y_i + y_1) + y_1`.
pub fn corrected_eta(y: &MeasurementSet) -> f64 {
    let n = y.omega.shape.side() as f64;
    let y1 = y.counts[y.ones_row_index] as f64;
    let var: f64 = y
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| if i == y.ones_row_index { y1 } else { 4.0 * c as f64 + y1 })
        .sum();
    var.sqrt() / n
}

/// Noise level of `y / N` for the baseline.
pub fn raw_eta(y: &MeasurementSet) -> f64 {
    let n = y.omega.shape.side() as f64;
    (y.counts.iter().map(|&c| c as f64).sum::<f64>()).sqrt() / n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMode {
    /// `U = Ψ B Φ*`.
    FullChain,
    /// `U = Ψ Φ*`.
    HadamardOnly,
}

/// A recovery with its image, in `[0, 1]` intensity units.
#[derive(Debug, Clone)]
pub struct CfmRecovery {
    pub result: RecoveryResult,
    pub image: Vec<f64>,
    /// Percent, against the scene when known.
    pub error: Option<f64>,
}

fn synthesis(n: usize, wavelet: WaveletSpec) -> Result<Operator> {
    Ok(Arc::new(Adjoint(Arc::new(Dwt2::new(n, wavelet)?))))
}

fn finish(result: RecoveryResult, phi: &Operator, n: usize, budget: f64, truth: Option<&[f64]>) -> Result<CfmRecovery> {
    let scale = photon_scale(n, budget);
    let image: Vec<f64> = phi.apply(&result.estimate).iter().map(|v| (v.re / scale).clamp(0.0, 1.0)).collect();
    let error = truth.map(|t| relative_error_real(&image, t)).transpose()?;
    Ok(CfmRecovery { result, image, error })
}

/// `min ‖z‖₁` s.t. `‖y′/N − P_Ω U z‖ ≤ η`; the image is `Φ* z`, rescaled to
/// intensity units and clamped to `[0, 1]`.
#[allow(clippy::too_many_arguments)]
pub fn recover_cfm(
    y_corrected: &[f64],
    omega: &SamplingMap,
    psf: PsfSpec,
    wavelet: WaveletSpec,
    eta: f64,
    mode: RecoveryMode,
    budget: f64,
    controls: SolverControls,
    truth: Option<&[f64]>,
) -> Result<CfmRecovery> {
    let n = omega.shape.side();
    let phi = synthesis(n, wavelet)?;
    let had: Operator = Arc::new(Hadamard2::new(n, HadamardOrdering::Sequency)?);
    let u = match mode {
        RecoveryMode::FullChain => compose(vec![had, Arc::new(psf.operator(n)?) as Operator, Arc::clone(&phi)])?,
        RecoveryMode::HadamardOnly => compose(vec![had, Arc::clone(&phi)])?,
    };
    let y: Vec<C64> = y_corrected.iter().map(|&v| C64::new(v / n as f64, 0.0)).collect();
    let problem = RecoveryProblem::new(u, omega, y, eta);
    let problem = RecoveryProblem { regularizer: Regularizer::L1, controls, ..problem };
    finish(solve(&problem)?, &phi, n, budget, truth)
}

/// The earlier scheme: raw counts against `Ψ_m`, a half-half map and no PSF
/// model. `min ‖Φ x‖₁` s.t. `‖y/N − P_Ω Ψ_m x‖ ≤ η` is solved as
/// `min ‖z‖₁` over `x = Φ* z`, which is the same problem for orthogonal `Φ`.
#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub measurements: MeasurementSet,
    pub recovery: CfmRecovery,
}

#[allow(clippy::too_many_arguments)]
pub fn initial_approach_baseline(
    x: &[f64],
    n: usize,
    psf: PsfSpec,
    fraction: f64,
    wavelet: WaveletSpec,
    budget: f64,
    map_seed: u64,
    noise_seed: Option<u64>,
    controls: SolverControls,
) -> Result<BaselineOutcome> {
    let shape = Shape::D2(n);
    let budget_count = (fraction * (n * n) as f64).round() as usize;
    let map = half_half_map(shape, fraction, budget_count / 2, IndexOrdering::CornerSquare, map_seed)?;
    let y = acquire(x, psf, map, budget, noise_seed)?;
    let eta = if noise_seed.is_some() { raw_eta(&y) } else { 0.0 };
    let recovery = recover_raw(&y, wavelet, eta, budget, controls, Some(x))?;
    Ok(BaselineOutcome { measurements: y, recovery })
}

/// Recovery from raw counts with the pattern operator.
pub fn recover_raw(
    y: &MeasurementSet,
    wavelet: WaveletSpec,
    eta: f64,
    budget: f64,
    controls: SolverControls,
    truth: Option<&[f64]>,
) -> Result<CfmRecovery> {
    y.validate()?;
    let n = y.omega.shape.side();
    let phi = synthesis(n, wavelet)?;
    let u = compose(vec![Arc::new(PatternOperator::new(n)?) as Operator, Arc::clone(&phi)])?;
    let meas: Vec<C64> = y.counts.iter().map(|&c| C64::new(c as f64 / n as f64, 0.0)).collect();
    let problem = RecoveryProblem::new(u, &y.omega, meas, eta);
    let problem = RecoveryProblem { regularizer: Regularizer::L1, controls, ..problem };
    finish(solve(&problem)?, &phi, n, budget, truth)
}

/// `max |2Ψ_m p − 𝟙 p − Ψ p|` over the probes.
pub fn pattern_identity_defect(n: usize, probes: &[Vec<C64>]) -> Result<f64> {
    let pm = PatternOperator::new(n)?;
    let had = Hadamard2::new(n, HadamardOrdering::Sequency)?;
    let mut worst = 0.0f64;
    for p in probes {
        let s: C64 = p.iter().sum::<C64>() / n as f64;
        let a = pm.apply(p);
        let b = had.apply(p);
        for (u, v) in a.iter().zip(&b) {
            worst = worst.max((u * 2.0 - s - v).norm());
        }
    }
    Ok(worst)
}

/// `‖B 𝟙x − 𝟙x‖ / ‖𝟙x‖`.
pub fn ones_pattern_residual(x: &[f64], n: usize, psf: PsfSpec) -> Result<f64> {
    if x.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: x.len() });
    }
    let s = x.iter().sum::<f64>() / n as f64;
    let ones = vec![C64::new(s, 0.0); n * n];
    let b = psf.operator(n)?.apply(&ones);
    let num: f64 = b.iter().zip(&ones).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
    let den = crate::linalg::norm(&ones);
    if den == 0.0 {
        return Err(Error::invalid("residual undefined for a zero image"));
    }
    Ok(num / den)
}
