//! Local sparsities, sparsity curves and sparsity-in-levels checks.
//!
//! Norms are taken in coefficient space; for an orthonormal basis they equal
//! the function-space norms.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::LevelStructure;
use crate::rng::SeededRng;
use crate::signal::{Shape, Signal};
use crate::transforms::{Dwt1, Dwt2, LinearOperator, WaveletSpec};
use crate::C64;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("ε must lie in (0, 1], got {eps}")))
    }
}

/// Squared magnitudes of one band sorted descending; ties keep index order.
fn sorted_energy(band: &[C64]) -> Vec<f64> {
    let mut e: Vec<f64> = band.iter().map(|z| z.norm_sqr()).collect();
    // Stable sort: equal magnitudes stay in index order.
    e.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    e
}

/// Smallest `L` whose `L` largest entries carry norm `≥ ε · ‖band‖`.
fn band_sparsity(sorted: &[f64], eps: f64) -> usize {
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return 0;
    }
    let target = eps * eps * total;
    let mut acc = 0.0;
    for (l, &e) in sorted.iter().enumerate() {
        acc += e;
        // Relative slack absorbs summation-order rounding at ε = 1.
        if acc >= target * (1.0 - 4.0 * f64::EPSILON) {
            return l + 1;
        }
    }
    sorted.len()
}

/// `s_k(ε)` for every level.
pub fn local_sparsity(coeffs: &[C64], levels: &LevelStructure, eps: f64) -> Result<Vec<usize>> {
    check_eps(eps)?;
    if coeffs.len() != levels.total() {
        return Err(Error::DimensionMismatch { expected: levels.total(), found: coeffs.len() });
    }
    Ok(levels.ranges().map(|r| band_sparsity(&sorted_energy(&coeffs[r]), eps)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityProfile {
    pub levels: LevelStructure,
    pub epsilons: Vec<f64>,
    /// `s_matrix[k][e] = s_k(epsilons[e])`.
    pub s_matrix: Vec<Vec<usize>>,
    /// `s_k(ε) / (M_k − M_{k−1})`.
    pub relative: Vec<Vec<f64>>,
}

impl SparsityProfile {
    /// Evaluates every level on an ε grid.
    pub fn compute(coeffs: &[C64], levels: &LevelStructure, epsilons: &[f64]) -> Result<Self> {
        for &e in epsilons {
            check_eps(e)?;
        }
        if coeffs.len() != levels.total() {
            return Err(Error::DimensionMismatch { expected: levels.total(), found: coeffs.len() });
        }
        let mut s_matrix = Vec::with_capacity(levels.num_levels());
        let mut relative = Vec::with_capacity(levels.num_levels());
        for r in levels.ranges() {
            let width = r.len() as f64;
            let sorted = sorted_energy(&coeffs[r]);
            let row: Vec<usize> = epsilons.iter().map(|&e| band_sparsity(&sorted, e)).collect();
            relative.push(row.iter().map(|&s| s as f64 / width).collect());
            s_matrix.push(row);
        }
        Ok(SparsityProfile { levels: levels.clone(), epsilons: epsilons.to_vec(), s_matrix, relative })
    }

    /// `(k, ε, s_k, relative)` rows for tabular export.
    pub fn rows(&self) -> Vec<(usize, f64, usize, f64)> {
        let mut out = Vec::new();
        for k in 0..self.levels.num_levels() {
            for (e, &eps) in self.epsilons.iter().enumerate() {
                out.push((k, eps, self.s_matrix[k][e], self.relative[k][e]));
            }
        }
        out
    }
}

/// Coefficients below this fraction of the image norm are transform roundoff
/// and count as zero in [`sparsity_curve`].
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Wavelet-transforms `image` and profiles its scales. Level 0 is the
/// scaling block; levels `1..=r` are detail scales from coarse to fine.
pub fn sparsity_curve(image: &Signal, wavelet: WaveletSpec, epsilons: &[f64]) -> Result<SparsityProfile> {
    let (mut coeffs, levels) = match image.shape {
        Shape::D1(n) => {
            let w = Dwt1::new(n, wavelet)?;
            (w.apply(&image.data), w.level_structure())
        }
        Shape::D2(n) => {
            let w = Dwt2::new(n, wavelet)?;
            (w.apply(&image.data), w.level_structure())
        }
    };
    let floor = ROUNDOFF_FLOOR * crate::linalg::norm(&image.data);
    for z in coeffs.iter_mut().filter(|z| z.norm() <= floor) {
        *z = C64::new(0.0, 0.0);
    }
    SparsityProfile::compute(&coeffs, &levels, epsilons)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelsCheck {
    pub sparse: bool,
    /// Support size per band.
    pub counts: Vec<usize>,
    /// `max(0, count_k − s_k)` per band.
    pub overflow: Vec<usize>,
}

/// Checks `|supp(x) ∩ band_k| ≤ s_k`, where the support is `{i : |x_i| > threshold}`.
pub fn is_sparse_in_levels(
    coeffs: &[C64],
    levels: &LevelStructure,
    s: &[usize],
    threshold: f64,
) -> Result<LevelsCheck> {
    if coeffs.len() != levels.total() {
        return Err(Error::DimensionMismatch { expected: levels.total(), found: coeffs.len() });
    }
    if s.len() != levels.num_levels() {
        return Err(Error::DimensionMismatch { expected: levels.num_levels(), found: s.len() });
    }
    if s.iter().enumerate().any(|(k, &sk)| sk > levels.width(k)) {
        return Err(Error::invalid("a sparsity budget exceeds its level width"));
    }
    let counts: Vec<usize> = levels
        .ranges()
        .map(|r| coeffs[r].iter().filter(|z| z.norm() > threshold).count())
        .collect();
    let overflow: Vec<usize> = counts.iter().zip(s).map(|(&c, &sk)| c.saturating_sub(sk)).collect();
    Ok(LevelsCheck { sparse: overflow.iter().all(|&o| o == 0), counts, overflow })
}

/// A real vector with exactly `s_k` Gaussian nonzeros placed uniformly in each band.
pub fn random_sparse_in_levels(levels: &LevelStructure, s: &[usize], rng: &mut SeededRng) -> Result<Vec<C64>> {
    if s.len() != levels.num_levels() {
        return Err(Error::DimensionMismatch { expected: levels.num_levels(), found: s.len() });
    }
    let mut x = vec![C64::new(0.0, 0.0); levels.total()];
    for (r, &sk) in levels.ranges().zip(s) {
        if sk > r.len() {
            return Err(Error::invalid("a sparsity budget exceeds its level width"));
        }
        let mut pool: Vec<usize> = r.collect();
        for t in 0..sk {
            let pick = rng.random_range(t..pool.len());
            pool.swap(t, pick);
            let v: f64 = rng.sample(rand_distr::StandardNormal);
            // Bounded away from zero so that the support is unambiguous.
            x[pool[t]] = C64::new(v.signum() * (0.1 + v.abs()), 0.0);
        }
    }
    Ok(x)
}
