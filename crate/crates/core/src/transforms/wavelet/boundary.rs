//! Boundary-corrected Daubechies filters on an interval.
//!
//! Interior rows are the periodic filter rows whose support lies inside the
//! signal. The `2p`-dimensional orthogonal complement of those rows at each
//! edge is split into `p` low-pass rows, which reproduce polynomials of degree
//! below `p` exactly, and `p` high-pass rows. Because the coarse coefficients of
//! a sampled polynomial are no longer plain samples of a polynomial near the
//! edge, the edge values of the polynomial basis are carried from level to
//! level; this is what keeps all `p` vanishing moments at every depth.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{binomial, gram_schmidt, RMat};

/// Edge rows for one side of one level, written in coordinates that start at
/// the edge (the right side is mirrored).
#[derive(Debug, Clone)]
pub(crate) struct EdgeRows {
    pub low: RMat,
    pub high: RMat,
}

impl EdgeRows {
    pub fn support(&self) -> usize {
        self.low.cols
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BoundaryLevel {
    pub left: EdgeRows,
    pub right: EdgeRows,
}

/// Smallest input length a boundary level of order `p` accepts.
pub(crate) fn min_level_len(p: usize) -> usize {
    (4 * p).max(6 * p - 2)
}

fn highpass_of(h: &[f64], p: usize) -> Vec<f64> {
    (0..2 * p)
        .map(|i| {
            let l = i as i64 - p as i64 + 1;
            let v = h[(p as i64 - l) as usize];
            if l.rem_euclid(2) == 0 { v } else { -v }
        })
        .collect()
}

fn interior_rows(h: &[f64], n: usize, p: usize) -> Vec<Vec<f64>> {
    let g = highpass_of(h, p);
    let mut rows = Vec::new();
    for k in p..n / 2 - p {
        let start = 2 * k + 1 - p;
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        lo[start..start + 2 * p].copy_from_slice(h);
        hi[start..start + 2 * p].copy_from_slice(&g);
        rows.push(lo);
        rows.push(hi);
    }
    rows
}

/// Orthonormal basis (as rows) of the complement of the interior rows near
/// the left edge, truncated to its support.
fn left_complement(h: &[f64], p: usize) -> Result<RMat> {
    let n = 20 * p + 8;
    let rows = interior_rows(h, n, p);
    // Columns of I - RᵀR restricted to the left half span the left complement.
    let mut cols = Vec::with_capacity(n / 2);
    for j in 0..n / 2 {
        let mut c = vec![0.0; n];
        c[j] = 1.0;
        for r in &rows {
            let w = r[j];
            if w != 0.0 {
                for (ci, ri) in c.iter_mut().zip(r) {
                    *ci -= w * ri;
                }
            }
        }
        cols.push(c);
    }
    let basis = gram_schmidt(&cols, 1e-8);
    if basis.len() != 2 * p {
        return Err(Error::ConstructionFailed(alloc::format!(
            "edge complement has dimension {} instead of {}",
            basis.len(),
            2 * p
        )));
    }
    let support = basis
        .iter()
        .filter_map(|b| b.iter().rposition(|v| v.abs() > 1e-12))
        .max()
        .map_or(0, |i| i + 1);
    let trimmed: Vec<Vec<f64>> = basis.iter().map(|b| b[..support].to_vec()).collect();
    Ok(RMat::from_rows(&trimmed))
}

/// Monomials `(k / 4p)^d` sampled at the first `count` positions.
fn monomials(p: usize, count: usize) -> RMat {
    let c = 4.0 * p as f64;
    let mut m = RMat::zeros(count, p);
    for k in 0..count {
        for d in 0..p {
            m[(k, d)] = (k as f64 / c).powi(d as i32);
        }
    }
    m
}

/// One level of edge construction. `edge_values[k][d]` is the value at edge
/// position `k < p` of the fine-level representative of monomial `d`.
fn edge_step(h: &[f64], p: usize, basis: &RMat, edge_values: &RMat) -> Result<(EdgeRows, RMat)> {
    let s = basis.cols;
    let c = 4.0 * p as f64;
    let mut pw = monomials(p, s);
    for k in 0..p {
        pw.row_mut(k).copy_from_slice(edge_values.row(k));
    }
    let m = basis.matmul(&pw);
    let cols: Vec<Vec<f64>> = (0..p).map(|d| m.col(d)).collect();
    let q = gram_schmidt(&cols, 1e-12);
    if q.len() != p {
        return Err(Error::ConstructionFailed("polynomial edge space is degenerate".into()));
    }
    let mut ext = q.clone();
    for i in 0..2 * p {
        let mut e = vec![0.0; 2 * p];
        e[i] = 1.0;
        ext.push(e);
    }
    let full = gram_schmidt(&ext, 1e-10);
    if full.len() != 2 * p {
        return Err(Error::ConstructionFailed("edge high-pass completion failed".into()));
    }
    let low = RMat::from_rows(&q).matmul(basis);
    let high = RMat::from_rows(&full[p..]).matmul(basis);

    // Coarse monomial coefficients of a fine monomial: with u = k/c the coarse
    // sample at 2k + l sees (2u + l/c)^d.
    let mut t = RMat::zeros(p, p);
    for d in 0..p {
        for (i, &hl) in h.iter().enumerate() {
            let l = i as f64 - p as f64 + 1.0;
            for e in 0..=d {
                t[(e, d)] += hl * binomial(d, e) * 2f64.powi(e as i32) * (l / c).powi((d - e) as i32);
            }
        }
    }
    let coarse = low.matmul(&pw).matmul(&t.inverse()?);
    Ok((EdgeRows { low, high }, coarse))
}

/// Orthonormality of the edge rows and their orthogonality to the interior
/// rows that overlap them.
fn edge_defect(h: &[f64], p: usize, rows: &EdgeRows) -> f64 {
    let s = rows.support();
    let n = 20 * p + 8;
    let mut all: Vec<Vec<f64>> = Vec::new();
    for r in 0..p {
        let mut v = rows.low.row(r).to_vec();
        v.resize(n, 0.0);
        all.push(v);
        let mut v = rows.high.row(r).to_vec();
        v.resize(n, 0.0);
        all.push(v);
    }
    let edge_count = all.len();
    for r in interior_rows(h, n, p) {
        if r[..s].iter().any(|v| *v != 0.0) {
            all.push(r);
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..edge_count {
        for j in 0..all.len() {
            let d: f64 = all[i].iter().zip(&all[j]).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((d - target).abs());
        }
    }
    worst
}

/// Edge rows for `levels` successive levels of order `p ≥ 2`, finest first.
pub(crate) fn boundary_levels(h: &[f64], p: usize, levels: usize) -> Result<Vec<BoundaryLevel>> {
    let hr: Vec<f64> = h.iter().rev().copied().collect();
    let bl = left_complement(h, p)?;
    let br = left_complement(&hr, p)?;
    let mut el = monomials(p, p);
    let mut er = monomials(p, p);
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (left, next_l) = edge_step(h, p, &bl, &el)?;
        let (right, next_r) = edge_step(&hr, p, &br, &er)?;
        let defect = edge_defect(h, p, &left).max(edge_defect(&hr, p, &right));
        if defect > 1e-10 {
            return Err(Error::ConstructionFailed(alloc::format!(
                "boundary filters are not orthonormal (defect {defect:.2e})"
            )));
        }
        out.push(BoundaryLevel { left, right });
        el = next_l;
        er = next_r;
    }
    Ok(out)
}

/// Edge rows at the fixed point of the edge-value recursion, so every level
/// uses the same rows. Returns the rows and the fixed-point edge values of
/// each side (`values[k][d]`, degree-0 column = integrals of the boundary
/// scaling functions).
pub(crate) fn stationary_level(h: &[f64], p: usize) -> Result<(BoundaryLevel, RMat, RMat)> {
    let hr: Vec<f64> = h.iter().rev().copied().collect();
    let side = |f: &[f64]| -> Result<(EdgeRows, RMat)> {
        let b = left_complement(f, p)?;
        let mut e = monomials(p, p);
        for _ in 0..400 {
            let (_, next) = edge_step(f, p, &b, &e)?;
            let change = next.data.iter().zip(&e.data).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
            e = next;
            if change < 1e-15 {
                let (rows, _) = edge_step(f, p, &b, &e)?;
                return Ok((rows, e));
            }
        }
        Err(Error::ConstructionFailed("edge values did not reach a fixed point".into()))
    };
    let (left, el) = side(h)?;
    let (right, er) = side(&hr)?;
    let defect = edge_defect(h, p, &left).max(edge_defect(&hr, p, &right));
    if defect > 1e-10 {
        return Err(Error::ConstructionFailed(alloc::format!(
            "stationary boundary filters are not orthonormal (defect {defect:.2e})"
        )));
    }
    Ok((BoundaryLevel { left, right }, el, er))
}
