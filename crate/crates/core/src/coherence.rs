//! Global, local and tail coherence of an operator, relative sparsities and
//! the per-level sample-count diagnostic.
//!
//! Everything is computed by streaming columns `U e_j`, so an `N × N` operator
//! costs `N` applications and `O(N)` memory beyond one column.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::LevelStructure;
use crate::rng::seeded;
use crate::transforms::{materialize, LinearOperator};
use crate::C64;

/// `e_iᵀ U e_j`.
pub fn entry(u: &dyn LinearOperator, i: usize, j: usize) -> Result<C64> {
    if i >= u.dim_out() || j >= u.dim_in() {
        return Err(Error::invalid(alloc::format!(
            "entry ({i}, {j}) outside a {}x{} operator",
            u.dim_out(),
            u.dim_in()
        )));
    }
    Ok(u.column(j)[i])
}

/// Calls `f(j, U e_j)` for every column.
pub fn for_each_column(u: &dyn LinearOperator, mut f: impl FnMut(usize, &[C64])) {
    let mut e = vec![C64::new(0.0, 0.0); u.dim_in()];
    let mut col = vec![C64::new(0.0, 0.0); u.dim_out()];
    for j in 0..u.dim_in() {
        e[j] = C64::new(1.0, 0.0);
        u.apply_into(&e, &mut col);
        e[j] = C64::new(0.0, 0.0);
        f(j, &col);
    }
}

/// `μ(U) = max |u_ij|²`.
pub fn global_coherence(u: &dyn LinearOperator) -> f64 {
    let mut worst: f64 = 0.0;
    for_each_column(u, |_, col| {
        for z in col {
            worst = worst.max(z.norm_sqr());
        }
    });
    worst
}

/// Squared magnitudes `|u_ij|²`, row-major. Refuses operators with more than
/// 2²⁰ entries.
pub fn coherence_matrix(u: &dyn LinearOperator) -> Result<Vec<f64>> {
    let (rows, cols) = (u.dim_out(), u.dim_in());
    if rows * cols > 1 << 20 {
        return Err(Error::TooLarge(alloc::format!("{rows}x{cols} coherence matrix")));
    }
    let mut out = vec![0.0; rows * cols];
    for_each_column(u, |j, col| {
        for (i, z) in col.iter().enumerate() {
            out[i * cols + j] = z.norm_sqr();
        }
    });
    Ok(out)
}

/// Everything derivable from one pass over the columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub global: f64,
    /// `local[k][l] = μ_{N,M}(k, l)`.
    pub local: Vec<Vec<f64>>,
    pub k_grid: Vec<usize>,
    /// `μ(P⊥_K U)` for each `K` in `k_grid`.
    pub tail_row: Vec<f64>,
    /// `μ(U P⊥_K)` for each `K` in `k_grid`.
    pub tail_col: Vec<f64>,
}

/// Row-band by column-level maxima of `|u_ij|²`, plus per-row and per-column
/// maxima.
struct Maxima {
    block: Vec<Vec<f64>>,
    row: Vec<f64>,
    col: Vec<f64>,
}

fn maxima(u: &dyn LinearOperator, nlev: &LevelStructure, mlev: &LevelStructure) -> Result<Maxima> {
    if nlev.total() != u.dim_out() || mlev.total() != u.dim_in() {
        return Err(Error::invalid(alloc::format!(
            "level structures end at {} and {} but the operator is {}x{}",
            nlev.total(),
            mlev.total(),
            u.dim_out(),
            u.dim_in()
        )));
    }
    let row_level: Vec<usize> = (0..u.dim_out()).map(|i| nlev.level_of(i).expect("in range")).collect();
    let mut block = vec![vec![0.0f64; mlev.num_levels()]; nlev.num_levels()];
    let mut row = vec![0.0f64; u.dim_out()];
    let mut col = vec![0.0f64; u.dim_in()];
    let mut l = 0;
    for_each_column(u, |j, c| {
        while j >= mlev.bounds()[l] {
            l += 1;
        }
        for (i, z) in c.iter().enumerate() {
            let v = z.norm_sqr();
            let b = &mut block[row_level[i]][l];
            *b = b.max(v);
            row[i] = row[i].max(v);
            col[j] = col[j].max(v);
        }
    });
    Ok(Maxima { block, row, col })
}

/// `μ_{N,M}(k,l) = sqrt(μ(P_k U P_l) · μ(P_k U))`.
pub fn local_coherence(
    u: &dyn LinearOperator,
    nlev: &LevelStructure,
    mlev: &LevelStructure,
) -> Result<Vec<Vec<f64>>> {
    Ok(local_from_blocks(&maxima(u, nlev, mlev)?.block))
}

fn local_from_blocks(block: &[Vec<f64>]) -> Vec<Vec<f64>> {
    block
        .iter()
        .map(|b| {
            let band = b.iter().copied().fold(0.0, f64::max);
            b.iter().map(|v| (v * band).sqrt()).collect()
        })
        .collect()
}

fn suffix_max(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len() + 1];
    for i in (0..v.len()).rev() {
        out[i] = out[i + 1].max(v[i]);
    }
    out
}

/// `(μ(P⊥_K U), μ(U P⊥_K))` for every `K` in `k_grid`.
pub fn tail_coherence(u: &dyn LinearOperator, k_grid: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = LevelStructure::single(u.dim_out())?;
    let m = LevelStructure::single(u.dim_in())?;
    let mx = maxima(u, &n, &m)?;
    tails(&mx, k_grid)
}

fn tails(mx: &Maxima, k_grid: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (rs, cs) = (suffix_max(&mx.row), suffix_max(&mx.col));
    let mut tr = Vec::with_capacity(k_grid.len());
    let mut tc = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        if k >= mx.row.len() || k >= mx.col.len() {
            return Err(Error::invalid(alloc::format!("tail index {k} is not below the dimension")));
        }
        tr.push(rs[k]);
        tc.push(cs[k]);
    }
    Ok((tr, tc))
}

/// Global, local and tail coherence in one pass.
pub fn coherence_report(
    u: &dyn LinearOperator,
    nlev: &LevelStructure,
    mlev: &LevelStructure,
    k_grid: &[usize],
) -> Result<CoherenceReport> {
    let mx = maxima(u, nlev, mlev)?;
    let (tail_row, tail_col) = tails(&mx, k_grid)?;
    let global = mx.row.iter().copied().fold(0.0, f64::max);
    Ok(CoherenceReport {
        global,
        local: local_from_blocks(&mx.block),
        k_grid: k_grid.to_vec(),
        tail_row,
        tail_col,
    })
}

/// Tail coherences at `K = N / c` for a family of operators of growing size,
/// the finite-size proxy for asymptotic incoherence.
pub fn scaled_tail_coherence(ops: &[&dyn LinearOperator], c: f64) -> Result<Vec<(usize, f64, f64)>> {
    if c < 1.0 {
        return Err(Error::invalid("the tail ratio c must be at least 1"));
    }
    ops.iter()
        .map(|u| {
            let n = u.dim_out();
            let k = ((n as f64 / c).floor() as usize).min(n - 1);
            let (r, col) = tail_coherence(*u, &[k])?;
            Ok((n, r[0], col[0]))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityMode {
    /// Full enumeration; dimension at most 16.
    Exact,
    /// Randomised restarts with coordinate ascent.
    Greedy { restarts: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeSparsity {
    pub values: Vec<f64>,
    /// True when `values` are only guaranteed lower bounds (greedy mode).
    pub lower_bound: bool,
    /// For complex operators in exact mode the phases come from an 8-point
    /// grid; the true `S_k` is at most `(sqrt(values[k]) + phase_slack)²`.
    pub phase_slack: f64,
}

/// Largest operator dimension accepted by exact enumeration.
pub const EXACT_MAX_DIM: usize = 16;
const EXACT_MAX_EVALS: f64 = 5.0e7;
const PHASES: usize = 8;

struct Problem {
    cols: Vec<Vec<C64>>,
    nlev: LevelStructure,
    mlev: LevelStructure,
    s: Vec<usize>,
    phases: Vec<C64>,
}

impl Problem {
    fn band_norms(&self, support: &[(usize, usize)], out: &mut [f64]) {
        let n = self.cols[0].len();
        let mut v = vec![C64::new(0.0, 0.0); n];
        for &(j, ph) in support {
            let z = self.phases[ph];
            for (vi, c) in v.iter_mut().zip(&self.cols[j]) {
                *vi += c * z;
            }
        }
        for (k, r) in self.nlev.ranges().enumerate() {
            out[k] = v[r].iter().map(|z| z.norm_sqr()).sum();
        }
    }
}

fn is_real(cols: &[Vec<C64>]) -> bool {
    cols.iter().flatten().all(|z| z.im.abs() <= 1e-14 * (1.0 + z.re.abs()))
}

/// `S_k = max_{z ∈ Θ} ‖P_k U z‖²` for every sampling level `k`.
pub fn relative_sparsity(
    u: &dyn LinearOperator,
    nlev: &LevelStructure,
    mlev: &LevelStructure,
    s: &[usize],
    mode: SparsityMode,
) -> Result<RelativeSparsity> {
    if nlev.total() != u.dim_out() || mlev.total() != u.dim_in() {
        return Err(Error::invalid("level structures do not match the operator"));
    }
    if s.len() != mlev.num_levels() {
        return Err(Error::DimensionMismatch { expected: mlev.num_levels(), found: s.len() });
    }
    for (l, &sl) in s.iter().enumerate() {
        if sl > mlev.width(l) {
            return Err(Error::invalid(alloc::format!(
                "sparsity {sl} exceeds the width {} of level {l}",
                mlev.width(l)
            )));
        }
    }
    if matches!(mode, SparsityMode::Exact) && u.dim_in().max(u.dim_out()) > EXACT_MAX_DIM {
        return Err(Error::TooLarge(alloc::format!(
            "exact relative sparsity needs dimension ≤ {EXACT_MAX_DIM}, got {}",
            u.dim_in().max(u.dim_out())
        )));
    }
    let cols = if u.dim_in() <= 4096 {
        materialize(u)
    } else {
        return Err(Error::TooLarge("relative sparsity above dimension 4096".into()));
    };
    let real = is_real(&cols);
    let phases: Vec<C64> = if real {
        vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]
    } else {
        (0..PHASES).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / PHASES as f64)).collect()
    };
    let total_s: usize = s.iter().sum();
    let problem = Problem { cols, nlev: nlev.clone(), mlev: mlev.clone(), s: s.to_vec(), phases };
    match mode {
        SparsityMode::Exact => {
            let values = exact(&problem)?;
            let slack = if real {
                0.0
            } else {
                2.0 * (PI / (2.0 * PHASES as f64)).sin() * (total_s as f64).sqrt()
            };
            Ok(RelativeSparsity { values, lower_bound: false, phase_slack: slack })
        }
        SparsityMode::Greedy { restarts, seed } => Ok(RelativeSparsity {
            values: greedy(&problem, restarts.max(1), seed),
            lower_bound: true,
            phase_slack: 0.0,
        }),
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for t in i + 1..k {
                    cur[t] = cur[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn exact(p: &Problem) -> Result<Vec<f64>> {
    let r = p.nlev.num_levels();
    let total_s: usize = p.s.iter().sum();
    if total_s == 0 {
        return Ok(vec![0.0; r]);
    }
    let per_level: Vec<Vec<Vec<usize>>> = p
        .s
        .iter()
        .enumerate()
        .map(|(l, &sl)| {
            let off = p.mlev.range(l).start;
            combinations(p.mlev.width(l), sl)
                .into_iter()
                .map(|c| c.into_iter().map(|i| i + off).collect())
                .collect()
        })
        .collect();
    let supports: f64 = per_level.iter().map(|v| v.len() as f64).product();
    // A global phase does not change any norm, so the first entry is fixed.
    let patterns = (p.phases.len() as f64).powi(total_s as i32 - 1);
    if supports * patterns > EXACT_MAX_EVALS {
        return Err(Error::TooLarge(alloc::format!(
            "exact enumeration would visit {:.2e} points",
            supports * patterns
        )));
    }
    let np = p.phases.len();
    let mut best = vec![0.0f64; r];
    let mut norms = vec![0.0; r];
    let mut choice = vec![0usize; p.s.len()];
    let mut support: Vec<(usize, usize)> = Vec::with_capacity(total_s);
    loop {
        let idx: Vec<usize> = choice
            .iter()
            .enumerate()
            .flat_map(|(l, &c)| per_level[l][c].iter().copied())
            .collect();
        let count = np.pow(total_s as u32 - 1);
        for mut code in 0..count {
            support.clear();
            support.push((idx[0], 0));
            for &j in &idx[1..] {
                support.push((j, code % np));
                code /= np;
            }
            p.band_norms(&support, &mut norms);
            for k in 0..r {
                best[k] = best[k].max(norms[k]);
            }
        }
        let mut l = 0;
        loop {
            if l == choice.len() {
                return Ok(best);
            }
            choice[l] += 1;
            if choice[l] < per_level[l].len() {
                break;
            }
            choice[l] = 0;
            l += 1;
        }
    }
}

fn greedy(p: &Problem, restarts: usize, seed: u64) -> Vec<f64> {
    let r = p.nlev.num_levels();
    let np = p.phases.len();
    let mut best = vec![0.0f64; r];
    if p.s.iter().sum::<usize>() == 0 {
        return best;
    }
    let mut rng = seeded(seed);
    let mut norms = vec![0.0; r];
    for k in 0..r {
        for _ in 0..restarts {
            // Random start: per level a random subset with random phases.
            let mut support: Vec<(usize, usize)> = Vec::new();
            for (l, &sl) in p.s.iter().enumerate() {
                let range = p.mlev.range(l);
                let mut pool: Vec<usize> = range.collect();
                for t in 0..sl {
                    let pick = rng.random_range(t..pool.len());
                    pool.swap(t, pick);
                    support.push((pool[t], rng.random_range(0..np)));
                }
            }
            p.band_norms(&support, &mut norms);
            let mut val = norms[k];
            loop {
                let mut improved = false;
                for pos in 0..support.len() {
                    let (j0, ph0) = support[pos];
                    let l = p.mlev.level_of(j0).expect("in range");
                    for j in p.mlev.range(l) {
                        if j != j0 && support.iter().any(|&(t, _)| t == j) {
                            continue;
                        }
                        for ph in 0..np {
                            if j == j0 && ph == ph0 {
                                continue;
                            }
                            support[pos] = (j, ph);
                            p.band_norms(&support, &mut norms);
                            if norms[k] > val * (1.0 + 1e-12) + 1e-300 {
                                val = norms[k];
                                improved = true;
                            } else {
                                support[pos] = (j0, ph0);
                            }
                            if improved {
                                break;
                            }
                        }
                        if improved {
                            break;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            best[k] = best[k].max(val);
        }
    }
    best
}

/// Per-level sample counts from the multilevel recovery condition with every
/// unspecified constant set to 1. A relative comparison, not a guarantee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBound {
    /// Smallest integer `m_k` with `m_k ≥ (N_k - N_{k-1}) (Σ_l μ(k,l) s_l) log N`,
    /// capped at the level width.
    pub m: Vec<usize>,
    /// Levels whose bound reached the level width.
    pub saturated: Vec<bool>,
    /// `m̂_k = m_k / log N`.
    pub m_hat: Vec<f64>,
    /// `max_l Σ_k ((N_k - N_{k-1}) / m̂_k - 1) μ(k,l) s̃_k - 1`; feasible when `≤ 0`.
    pub residual: Option<f64>,
}

pub fn sample_bound_diagnostic(
    nlev: &LevelStructure,
    mlev: &LevelStructure,
    s: &[usize],
    local: &[Vec<f64>],
    s_tilde: Option<&[f64]>,
) -> Result<SampleBound> {
    let r = nlev.num_levels();
    if mlev.num_levels() != r || s.len() != r || local.len() != r || local.iter().any(|v| v.len() != r) {
        return Err(Error::invalid("sample bound inputs need r levels throughout"));
    }
    let n = nlev.total() as f64;
    let logn = n.ln().max(f64::MIN_POSITIVE);
    let mut m = Vec::with_capacity(r);
    let mut saturated = Vec::with_capacity(r);
    for k in 0..r {
        let w = nlev.width(k);
        let mix: f64 = (0..r).map(|l| local[k][l] * s[l] as f64).sum();
        let need = w as f64 * mix * logn;
        // Absorb rounding so that exact integers are not bumped up.
        let mk = (need - 1e-9 * need.abs()).ceil().max(0.0) as usize;
        saturated.push(mk >= w);
        m.push(mk.min(w));
    }
    let m_hat: Vec<f64> = m.iter().map(|&mk| mk as f64 / logn).collect();
    let residual = match s_tilde {
        None => None,
        Some(st) => {
            if st.len() != r {
                return Err(Error::DimensionMismatch { expected: r, found: st.len() });
            }
            let mut worst = f64::NEG_INFINITY;
            for l in 0..r {
                let mut acc = 0.0;
                for k in 0..r {
                    let ratio = if m_hat[k] > 0.0 { nlev.width(k) as f64 / m_hat[k] } else { f64::INFINITY };
                    let term = (ratio - 1.0) * local[k][l] * st[k];
                    if term.is_finite() {
                        acc += term;
                    } else if local[k][l] * st[k] > 0.0 {
                        acc = f64::INFINITY;
                    }
                }
                worst = worst.max(acc - 1.0);
            }
            Some(worst)
        }
    };
    Ok(SampleBound { m, saturated, m_hat, residual })
}
