//! Orthonormal Daubechies wavelet transforms, periodic or boundary-corrected.
//!
//! Coefficients are ordered coarse to fine: the scaling block of length
//! `N / 2^r` followed by the detail blocks of levels `r, r-1, …, 1`. In 2D the
//! scaling block is the `(N/2^r)²` low-low square and each level contributes
//! its three detail squares (row-high, column-high, both-high), each row-major,
//! so every scale occupies a contiguous index range.

mod boundary;
pub mod filters;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::LinearOperator;
use crate::error::{check_pow2, Error, Result};
use crate::levels::LevelStructure;
use crate::linalg::RMat;
use crate::C64;
use boundary::{boundary_levels, min_level_len, stationary_level, BoundaryLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Periodic,
    Boundary,
}

/// Daubechies order, decomposition depth and edge treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub order: usize,
    pub levels: usize,
    pub mode: BoundaryMode,
}

impl WaveletSpec {
    pub fn periodic(order: usize, levels: usize) -> Self {
        WaveletSpec { order, levels, mode: BoundaryMode::Periodic }
    }

    pub fn boundary(order: usize, levels: usize) -> Self {
        WaveletSpec { order, levels, mode: BoundaryMode::Boundary }
    }

    /// Checks order and depth against a signal side `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        check_pow2(n)?;
        let p = self.order;
        if filters::lowpass(p).is_none() {
            return Err(Error::invalid(alloc::format!("wavelet order {p} is outside 1..=8")));
        }
        let too_deep = Error::DepthTooLarge { len: n, levels: self.levels, order: p };
        if self.levels >= usize::BITS as usize || (n >> self.levels) == 0 {
            return Err(too_deep);
        }
        if (1usize << self.levels) * (2 * p - 1) > n {
            return Err(too_deep);
        }
        if self.mode == BoundaryMode::Boundary && p > 1 && self.levels > 0 {
            let last_input = n >> (self.levels - 1);
            if last_input < min_level_len(p) {
                return Err(too_deep);
            }
        }
        Ok(())
    }

    /// Deepest decomposition accepted for side `n`.
    pub fn max_levels(order: usize, mode: BoundaryMode, n: usize) -> usize {
        let mut r = 0;
        while (WaveletSpec { order, levels: r + 1, mode }).validate(n).is_ok() {
            r += 1;
        }
        r
    }
}

/// Orthonormal 1D DWT of length `n`. `apply` is analysis, `apply_adjoint`
/// synthesis.
#[derive(Debug, Clone)]
pub struct Dwt1 {
    n: usize,
    spec: WaveletSpec,
    h: Vec<f64>,
    g: Vec<f64>,
    edges: Vec<BoundaryLevel>,
}

impl Dwt1 {
    pub fn new(n: usize, spec: WaveletSpec) -> Result<Self> {
        spec.validate(n)?;
        let p = spec.order;
        let h = filters::lowpass(p).expect("validated order").to_vec();
        let g = filters::highpass(p).expect("validated order")[..2 * p].to_vec();
        let edges = if spec.mode == BoundaryMode::Boundary && p > 1 {
            boundary_levels(&h, p, spec.levels)?
        } else {
            Vec::new()
        };
        Ok(Dwt1 { n, spec, h, g, edges })
    }

    /// Boundary-corrected transform whose edge rows are identical at every
    /// level (the fixed point of the edge recursion). Same as [`Dwt1::new`]
    /// for periodic edges and for Haar.
    pub fn stationary(n: usize, spec: WaveletSpec) -> Result<Self> {
        let mut t = Self::new(n, spec)?;
        if !t.edges.is_empty() {
            let (level, _, _) = stationary_level(&t.h, spec.order)?;
            t.edges = vec![level; spec.levels];
        }
        Ok(t)
    }

    pub fn spec(&self) -> WaveletSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Scale blocks: scaling block first, then details coarse to fine.
    pub fn level_structure(&self) -> LevelStructure {
        let coarse = self.n >> self.spec.levels;
        let bounds = (0..=self.spec.levels).map(|j| coarse << j).collect();
        LevelStructure::new(bounds).expect("dyadic bounds are increasing")
    }

    /// One analysis step of level `j` (input length `n >> j`).
    pub(crate) fn analyze_level(&self, j: usize, x: &[C64], lo: &mut [C64], hi: &mut [C64]) {
        let m = x.len();
        let half = m / 2;
        let p = self.spec.order;
        let taps = 2 * p;
        let (first, last) = match self.edges.get(j) {
            Some(_) => (p, half - p),
            None => (0, half),
        };
        for k in first..last {
            let base = 2 * k as isize + 1 - p as isize;
            let (mut a, mut d) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            if base >= 0 && base as usize + taps <= m {
                let seg = &x[base as usize..base as usize + taps];
                for i in 0..taps {
                    a += seg[i] * self.h[i];
                    d += seg[i] * self.g[i];
                }
            } else {
                for i in 0..taps {
                    let v = x[(base + i as isize).rem_euclid(m as isize) as usize];
                    a += v * self.h[i];
                    d += v * self.g[i];
                }
            }
            lo[k] = a;
            hi[k] = d;
        }
        if let Some(edge) = self.edges.get(j) {
            let s = edge.left.support();
            for r in 0..p {
                let (mut a, mut d) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for t in 0..s {
                    a += x[t] * edge.left.low[(r, t)];
                    d += x[t] * edge.left.high[(r, t)];
                }
                lo[r] = a;
                hi[r] = d;
                let (mut a, mut d) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for t in 0..s {
                    a += x[m - 1 - t] * edge.right.low[(r, t)];
                    d += x[m - 1 - t] * edge.right.high[(r, t)];
                }
                lo[half - 1 - r] = a;
                hi[half - 1 - r] = d;
            }
        }
    }

    /// Transpose of [`Self::analyze_level`]; overwrites `x`.
    pub(crate) fn synthesize_level(&self, j: usize, lo: &[C64], hi: &[C64], x: &mut [C64]) {
        let m = x.len();
        let half = m / 2;
        let p = self.spec.order;
        let taps = 2 * p;
        x.fill(C64::new(0.0, 0.0));
        let (first, last) = match self.edges.get(j) {
            Some(_) => (p, half - p),
            None => (0, half),
        };
        for k in first..last {
            let base = 2 * k as isize + 1 - p as isize;
            let (a, d) = (lo[k], hi[k]);
            if base >= 0 && base as usize + taps <= m {
                let seg = &mut x[base as usize..base as usize + taps];
                for i in 0..taps {
                    seg[i] += a * self.h[i] + d * self.g[i];
                }
            } else {
                for i in 0..taps {
                    let idx = (base + i as isize).rem_euclid(m as isize) as usize;
                    x[idx] += a * self.h[i] + d * self.g[i];
                }
            }
        }
        if let Some(edge) = self.edges.get(j) {
            let s = edge.left.support();
            for r in 0..p {
                let (a, d) = (lo[r], hi[r]);
                for t in 0..s {
                    x[t] += a * edge.left.low[(r, t)] + d * edge.left.high[(r, t)];
                }
                let (a, d) = (lo[half - 1 - r], hi[half - 1 - r]);
                for t in 0..s {
                    x[m - 1 - t] += a * edge.right.low[(r, t)] + d * edge.right.high[(r, t)];
                }
            }
        }
    }
}

impl LinearOperator for Dwt1 {
    fn dim_in(&self) -> usize {
        self.n
    }
    fn dim_out(&self) -> usize {
        self.n
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let mut cur = x.to_vec();
        let mut lo = vec![C64::new(0.0, 0.0); self.n / 2];
        let mut hi = vec![C64::new(0.0, 0.0); self.n / 2];
        let mut m = self.n;
        for j in 0..self.spec.levels {
            let half = m / 2;
            self.analyze_level(j, &cur[..m], &mut lo[..half], &mut hi[..half]);
            out[half..m].copy_from_slice(&hi[..half]);
            cur[..half].copy_from_slice(&lo[..half]);
            m = half;
        }
        out[..m].copy_from_slice(&cur[..m]);
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let mut m = self.n >> self.spec.levels;
        let mut cur = vec![C64::new(0.0, 0.0); self.n];
        cur[..m].copy_from_slice(&y[..m]);
        let mut buf = vec![C64::new(0.0, 0.0); self.n];
        for j in (0..self.spec.levels).rev() {
            let big = 2 * m;
            self.synthesize_level(j, &cur[..m], &y[m..big], &mut buf[..big]);
            cur[..big].copy_from_slice(&buf[..big]);
            m = big;
        }
        out.copy_from_slice(&cur);
    }
    fn name(&self) -> String {
        alloc::format!(
            "dwt1[{}:db{}:r{}:{:?}]",
            self.n, self.spec.order, self.spec.levels, self.spec.mode
        )
    }
    fn is_isometry(&self) -> bool {
        true
    }
    fn is_coisometry(&self) -> bool {
        true
    }
}

/// Isotropic orthonormal 2D DWT on an `n × n` grid.
#[derive(Debug, Clone)]
pub struct Dwt2 {
    inner: Dwt1,
}

impl Dwt2 {
    pub fn new(n: usize, spec: WaveletSpec) -> Result<Self> {
        Ok(Dwt2 { inner: Dwt1::new(n, spec)? })
    }

    pub fn side(&self) -> usize {
        self.inner.n
    }

    pub fn spec(&self) -> WaveletSpec {
        self.inner.spec
    }

    /// Scaling block then one block per detail level, coarse to fine.
    pub fn level_structure(&self) -> LevelStructure {
        let coarse = self.inner.n >> self.inner.spec.levels;
        let bounds = (0..=self.inner.spec.levels).map(|j| (coarse << j) * (coarse << j)).collect();
        LevelStructure::new(bounds).expect("dyadic bounds are increasing")
    }

    /// Row-major pyramid ("Mallat") layout to coefficient order.
    fn linearize(&self, pyr: &[C64], out: &mut [C64]) {
        let n = self.inner.n;
        let c = n >> self.inner.spec.levels;
        let mut pos = 0;
        for i in 0..c {
            out[pos..pos + c].copy_from_slice(&pyr[i * n..i * n + c]);
            pos += c;
        }
        let mut m = c;
        while m < n {
            for (r0, c0) in [(0, m), (m, 0), (m, m)] {
                for i in 0..m {
                    let src = (r0 + i) * n + c0;
                    out[pos..pos + m].copy_from_slice(&pyr[src..src + m]);
                    pos += m;
                }
            }
            m *= 2;
        }
    }

    fn delinearize(&self, coef: &[C64], pyr: &mut [C64]) {
        let n = self.inner.n;
        let c = n >> self.inner.spec.levels;
        let mut pos = 0;
        for i in 0..c {
            pyr[i * n..i * n + c].copy_from_slice(&coef[pos..pos + c]);
            pos += c;
        }
        let mut m = c;
        while m < n {
            for (r0, c0) in [(0, m), (m, 0), (m, m)] {
                for i in 0..m {
                    let dst = (r0 + i) * n + c0;
                    pyr[dst..dst + m].copy_from_slice(&coef[pos..pos + m]);
                    pos += m;
                }
            }
            m *= 2;
        }
    }
}

impl LinearOperator for Dwt2 {
    fn dim_in(&self) -> usize {
        self.inner.n * self.inner.n
    }
    fn dim_out(&self) -> usize {
        self.dim_in()
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let n = self.inner.n;
        let mut pyr = x.to_vec();
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut lo = vec![C64::new(0.0, 0.0); n / 2];
        let mut hi = vec![C64::new(0.0, 0.0); n / 2];
        let mut m = n;
        for j in 0..self.inner.spec.levels {
            let half = m / 2;
            for i in 0..m {
                let row = &mut pyr[i * n..i * n + m];
                self.inner.analyze_level(j, row, &mut lo[..half], &mut hi[..half]);
                row[..half].copy_from_slice(&lo[..half]);
                row[half..].copy_from_slice(&hi[..half]);
            }
            for col in 0..m {
                for i in 0..m {
                    line[i] = pyr[i * n + col];
                }
                self.inner.analyze_level(j, &line[..m], &mut lo[..half], &mut hi[..half]);
                for i in 0..half {
                    pyr[i * n + col] = lo[i];
                    pyr[(half + i) * n + col] = hi[i];
                }
            }
            m = half;
        }
        self.linearize(&pyr, out);
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let n = self.inner.n;
        self.delinearize(y, out);
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut lo = vec![C64::new(0.0, 0.0); n / 2];
        let mut hi = vec![C64::new(0.0, 0.0); n / 2];
        let mut m = n >> self.inner.spec.levels;
        for j in (0..self.inner.spec.levels).rev() {
            let big = 2 * m;
            for col in 0..big {
                for i in 0..m {
                    lo[i] = out[i * n + col];
                    hi[i] = out[(m + i) * n + col];
                }
                self.inner.synthesize_level(j, &lo[..m], &hi[..m], &mut line[..big]);
                for i in 0..big {
                    out[i * n + col] = line[i];
                }
            }
            for i in 0..big {
                let row = &mut out[i * n..i * n + big];
                lo[..m].copy_from_slice(&row[..m]);
                hi[..m].copy_from_slice(&row[m..]);
                self.inner.synthesize_level(j, &lo[..m], &hi[..m], &mut line[..big]);
                row.copy_from_slice(&line[..big]);
            }
            m = big;
        }
    }
    fn name(&self) -> String {
        let s = self.inner.spec;
        alloc::format!("dwt2[{}:db{}:r{}:{:?}]", self.inner.n, s.order, s.levels, s.mode)
    }
    fn is_isometry(&self) -> bool {
        true
    }
    fn is_coisometry(&self) -> bool {
        true
    }
}

/// Stationary edge data of order `p ≥ 2` in edge coordinates (the right side
/// mirrored, built from the reversed filter).
#[derive(Debug, Clone)]
pub struct StationaryEdges {
    /// `p` low rows over the edge support, left side.
    pub left_low: RMat,
    pub right_low: RMat,
    /// Fixed-point edge values `[k][d]` of the monomials; column 0 holds the
    /// integrals of the boundary scaling functions.
    pub left_values: RMat,
    pub right_values: RMat,
}

impl StationaryEdges {
    pub fn new(order: usize) -> Result<Self> {
        let h = filters::lowpass(order).ok_or_else(|| Error::invalid("wavelet order outside 1..=8"))?;
        if order < 2 {
            return Err(Error::invalid("Haar has no edge rows"));
        }
        let (level, left_values, right_values) = stationary_level(h, order)?;
        Ok(StationaryEdges { left_low: level.left.low, right_low: level.right.low, left_values, right_values })
    }
}
