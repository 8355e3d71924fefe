//! Sampling maps `Ω` as boolean masks over operator output indices.
//!
//! 2D DFT maps live on the centered frequency grid (DC at `(N/2, N/2)`),
//! matching [`FreqOrdering::Centered`]; Hadamard maps live on the sequency grid
//! (DC at `(0, 0)`) and are obtained with [`hadamard_ordering_adapter`].
//!
//! [`FreqOrdering::Centered`]: crate::transforms::FreqOrdering::Centered

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::LevelStructure;
use crate::rng::{seeded, substream};
use crate::signal::Shape;
use crate::transforms::FreqOrdering;

/// How an index grid is ranked from "low frequency" to "high frequency".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexOrdering {
    /// Index order as stored.
    Linear,
    /// 2D, DC at the centre, by Chebyshev distance from DC.
    CenteredSquare,
    /// 2D, DC at the centre, by Euclidean distance from DC.
    CenteredRadial,
    /// 2D, DC at `(0, 0)`, by `max(row, col)`.
    CornerSquare,
}

impl IndexOrdering {
    /// All indices of `shape` ranked low to high; ties keep index order.
    pub fn ranking(self, shape: Shape) -> Vec<usize> {
        let len = shape.len();
        let n = shape.side() as i64;
        let key = |i: usize| -> i64 {
            let (r, c) = ((i as i64) / n, (i as i64) % n);
            match self {
                IndexOrdering::Linear => 0,
                IndexOrdering::CenteredSquare => (r - n / 2).abs().max((c - n / 2).abs()),
                IndexOrdering::CenteredRadial => (r - n / 2).pow(2) + (c - n / 2).pow(2),
                IndexOrdering::CornerSquare => r.max(c),
            }
        };
        let mut idx: Vec<usize> = (0..len).collect();
        if matches!(shape, Shape::D2(_)) {
            idx.sort_by_key(|&i| key(i));
        }
        idx
    }
}

/// Parameters of the concentric exponential scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllRoundSpec {
    /// Region count `n ≥ 2` (for 2D, `n ≥ 3`).
    pub n: usize,
    /// Radius of the fully sampled inner disc, in `(0, 1)`.
    pub m_radius: f64,
    pub a: f64,
    pub b: f64,
}

impl AllRoundSpec {
    pub fn validate(&self, two_d: bool) -> Result<()> {
        let min_n = if two_d { 3 } else { 2 };
        if self.n < min_n {
            return Err(Error::invalid(alloc::format!("all-round scheme needs n ≥ {min_n}")));
        }
        if !(self.m_radius > 0.0 && self.m_radius < 1.0) {
            return Err(Error::invalid("all-round inner radius must lie in (0, 1)"));
        }
        if !(self.a > 0.0) || !(self.b >= 0.0) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::invalid("all-round shape parameters need a > 0 and b ≥ 0"));
        }
        Ok(())
    }

    /// `p_k = exp(−(b k / n)^a)` for regions `k = 0..n`.
    pub fn rates(&self) -> Vec<f64> {
        (0..self.n)
            .map(|k| (-(self.b * k as f64 / self.n as f64).powf(self.a)).exp())
            .collect()
    }

    /// Outer radius of each circular region. In 2D there are `n − 1` circles
    /// `r_k = m + k (1 − m)/(n − 2)` ending at 1, and region `n − 1` is the
    /// rest of the square. In 1D all `n` regions are intervals ending at 1.
    pub fn radii(&self, two_d: bool) -> Vec<f64> {
        let circles = if two_d { self.n - 1 } else { self.n };
        let m = self.m_radius;
        (0..circles)
            .map(|k| if circles == 1 { 1.0 } else { m + k as f64 * (1.0 - m) / (circles - 1) as f64 })
            .collect()
    }

    /// Region areas as fractions of the whole domain (`[−1, 1]²` or `[−1, 1]`).
    pub fn areas(&self, two_d: bool) -> Vec<f64> {
        let radii = self.radii(two_d);
        let mut out = Vec::with_capacity(self.n);
        let mut prev = 0.0;
        for &r in &radii {
            let cur = if two_d { PI * r * r / 4.0 } else { r };
            out.push(cur - prev);
            prev = cur;
        }
        if two_d {
            out.push(1.0 - PI / 4.0);
        }
        out
    }

    /// `Σ_k p_k A_k`.
    pub fn predicted_fraction(&self, two_d: bool) -> f64 {
        self.rates().iter().zip(self.areas(two_d)).map(|(p, a)| p * a).sum()
    }

    /// Region of a point at normalised radius `rho`.
    fn region(&self, radii: &[f64], rho: f64) -> usize {
        radii.iter().position(|&r| rho <= r).unwrap_or(self.n - 1)
    }
}

/// How a map was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Scheme {
    Uniform,
    HalfHalf { first_level_count: usize, ordering: IndexOrdering },
    Multilevel { levels: LevelStructure, counts: Vec<usize>, ordering: IndexOrdering },
    AllRound { spec: AllRoundSpec, predicted_fraction: f64 },
    HadamardAdapted { from: Box<Scheme> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingMap {
    pub shape: Shape,
    pub mask: Vec<bool>,
    pub seed: u64,
    pub scheme: Scheme,
    /// Samples per level or region of the scheme, where it has any.
    pub level_counts: Vec<usize>,
}

impl SamplingMap {
    pub fn m(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn fraction(&self) -> f64 {
        self.m() as f64 / self.mask.len() as f64
    }

    /// Sampled indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn full(shape: Shape) -> Result<Self> {
        shape.validate()?;
        Ok(SamplingMap {
            shape,
            mask: vec![true; shape.len()],
            seed: 0,
            scheme: Scheme::Uniform,
            level_counts: vec![shape.len()],
        })
    }
}

/// Marks `count` entries of `pool`, chosen by a seeded shuffle.
fn pick(mask: &mut [bool], pool: &mut [usize], count: usize, rng: &mut crate::rng::SeededRng) {
    let (chosen, _) = pool.partial_shuffle(rng, count);
    for &i in chosen.iter() {
        mask[i] = true;
    }
}

/// Mask of `m` distinct indices out of `0..len`, uniformly without replacement.
pub fn uniform_mask(len: usize, m: usize, seed: u64) -> Result<Vec<bool>> {
    if m > len {
        return Err(Error::invalid(alloc::format!("cannot draw {m} samples from {len}")));
    }
    let mut mask = vec![false; len];
    let mut pool: Vec<usize> = (0..len).collect();
    pick(&mut mask, &mut pool, m, &mut seeded(seed));
    Ok(mask)
}

/// `m` distinct indices uniformly without replacement.
pub fn uniform_map(shape: Shape, m: usize, seed: u64) -> Result<SamplingMap> {
    shape.validate()?;
    let mask = uniform_mask(shape.len(), m, seed)?;
    Ok(SamplingMap { shape, mask, seed, scheme: Scheme::Uniform, level_counts: vec![m] })
}

/// Budget `round(fraction · total)`: the first `first_level_count` indices of
/// `ordering` in full, the rest uniformly over the remaining indices.
pub fn half_half_map(
    shape: Shape,
    fraction: f64,
    first_level_count: usize,
    ordering: IndexOrdering,
    seed: u64,
) -> Result<SamplingMap> {
    shape.validate()?;
    let len = shape.len();
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid("sampling fraction must lie in [0, 1]"));
    }
    let budget = (fraction * len as f64).round() as usize;
    if first_level_count > budget {
        return Err(Error::invalid(alloc::format!(
            "first level of {first_level_count} exceeds the budget {budget}"
        )));
    }
    let rank = ordering.ranking(shape);
    let mut mask = vec![false; len];
    for &i in &rank[..first_level_count] {
        mask[i] = true;
    }
    let mut rest = rank[first_level_count..].to_vec();
    let tail = budget - first_level_count;
    pick(&mut mask, &mut rest, tail, &mut seeded(seed));
    Ok(SamplingMap {
        shape,
        mask,
        seed,
        scheme: Scheme::HalfHalf { first_level_count, ordering },
        level_counts: vec![first_level_count, tail],
    })
}

/// Independent uniform draws of `counts[k]` indices from each level, where
/// levels partition the `ordering` ranking.
pub fn multilevel_map(
    shape: Shape,
    levels: &LevelStructure,
    counts: &[usize],
    ordering: IndexOrdering,
    seed: u64,
) -> Result<SamplingMap> {
    shape.validate()?;
    if levels.total() != shape.len() {
        return Err(Error::DimensionMismatch { expected: shape.len(), found: levels.total() });
    }
    if counts.len() != levels.num_levels() {
        return Err(Error::DimensionMismatch { expected: levels.num_levels(), found: counts.len() });
    }
    let rank = ordering.ranking(shape);
    let mut mask = vec![false; shape.len()];
    for (k, r) in levels.ranges().enumerate() {
        if counts[k] > r.len() {
            return Err(Error::invalid(alloc::format!(
                "level {k} has width {} but {} samples were requested",
                r.len(),
                counts[k]
            )));
        }
        let mut pool = rank[r].to_vec();
        pick(&mut mask, &mut pool, counts[k], &mut substream(seed, k as u64));
    }
    Ok(SamplingMap {
        shape,
        mask,
        seed,
        scheme: Scheme::Multilevel { levels: levels.clone(), counts: counts.to_vec(), ordering },
        level_counts: counts.to_vec(),
    })
}

/// Region of every index of a centered grid.
fn all_round_regions(shape: Shape, spec: &AllRoundSpec) -> Vec<usize> {
    let n = shape.side();
    let half = (n / 2) as f64;
    let two_d = matches!(shape, Shape::D2(_));
    let radii = spec.radii(two_d);
    (0..shape.len())
        .map(|i| {
            let rho = if two_d {
                let fy = (i / n) as f64 - half;
                let fx = (i % n) as f64 - half;
                (fx * fx + fy * fy).sqrt() / half
            } else {
                (i as f64 - half).abs() / half
            };
            spec.region(&radii, rho)
        })
        .collect()
}

/// The concentric exponential scheme on the centered grid, normalised to
/// `[−1, 1]` per axis. Region `k` receives `round(p_k · |region k|)` samples.
pub fn all_round_map(shape: Shape, spec: AllRoundSpec, seed: u64) -> Result<SamplingMap> {
    shape.validate()?;
    let two_d = matches!(shape, Shape::D2(_));
    spec.validate(two_d)?;
    let region = all_round_regions(shape, &spec);
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); spec.n];
    for (i, &k) in region.iter().enumerate() {
        pools[k].push(i);
    }
    let rates = spec.rates();
    let mut mask = vec![false; shape.len()];
    let mut counts = Vec::with_capacity(spec.n);
    for (k, pool) in pools.iter_mut().enumerate() {
        let c = ((rates[k] * pool.len() as f64).round() as usize).min(pool.len());
        pick(&mut mask, pool, c, &mut substream(seed, k as u64));
        counts.push(c);
    }
    Ok(SamplingMap {
        shape,
        mask,
        seed,
        scheme: Scheme::AllRound { spec, predicted_fraction: spec.predicted_fraction(two_d) },
        level_counts: counts,
    })
}

/// Bisection on `b` so that the predicted fraction equals `target`.
/// The `b` field of `spec` is ignored.
pub fn calibrate_fraction(spec: AllRoundSpec, target: f64, two_d: bool) -> Result<f64> {
    let probe = AllRoundSpec { b: 0.0, ..spec };
    probe.validate(two_d)?;
    let inner = probe.areas(two_d)[0];
    if !(target > inner && target <= 1.0) {
        return Err(Error::invalid(alloc::format!(
            "target fraction {target} must lie in ({inner}, 1]"
        )));
    }
    if target == 1.0 {
        return Ok(0.0);
    }
    let frac = |b: f64| AllRoundSpec { b, ..spec }.predicted_fraction(two_d);
    let mut hi = 1.0;
    while frac(hi) > target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::invalid("calibration did not bracket the target"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if frac(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Moves a centered 2D map onto the sequency-ordered Hadamard grid, mapping
/// each axis frequency `f` to sequency `2f` (`f ≥ 0`) or `2|f| − 1` (`f < 0`).
pub fn hadamard_ordering_adapter(map: &SamplingMap) -> Result<SamplingMap> {
    let n = match map.shape {
        Shape::D2(n) => n,
        Shape::D1(_) => return Err(Error::invalid("the Hadamard adapter needs a 2D map")),
    };
    let axis: Vec<usize> = (0..n)
        .map(|i| {
            let f = FreqOrdering::Centered.frequency(n, i);
            FreqOrdering::Magnitude.position(n, f)
        })
        .collect();
    let mut mask = vec![false; n * n];
    for (i, &b) in map.mask.iter().enumerate() {
        if b {
            mask[axis[i / n] * n + axis[i % n]] = true;
        }
    }
    Ok(SamplingMap {
        shape: map.shape,
        mask,
        seed: map.seed,
        scheme: Scheme::HadamardAdapted { from: Box::new(map.scheme.clone()) },
        level_counts: map.level_counts.clone(),
    })
}

/// Per-index region labels of an all-round map, after the same axis bijection
/// when `hadamard` is set.
pub fn all_round_labels(shape: Shape, spec: &AllRoundSpec, hadamard: bool) -> Vec<usize> {
    let region = all_round_regions(shape, spec);
    if !hadamard {
        return region;
    }
    let n = shape.side();
    let axis: Vec<usize> = (0..n)
        .map(|i| FreqOrdering::Magnitude.position(n, FreqOrdering::Centered.frequency(n, i)))
        .collect();
    let mut out = vec![0; shape.len()];
    for (i, &k) in region.iter().enumerate() {
        out[axis[i / n] * n + axis[i % n]] = k;
    }
    out
}
