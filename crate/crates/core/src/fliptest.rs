//! Flip tests: recovery of a coefficient vector against recovery of its
//! reversal, and TV recovery of an image against a twin with the same
//! gradient-magnitude multiset.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::to_complex;
use crate::rng::substream;
use crate::solvers::{gradient_magnitudes, solve, tv_norm_real, RecoveryProblem, Regularizer, SolverControls};
use crate::transforms::Operator;
use crate::C64;

/// `x′_i = x_{N+1−i}` (1-based).
pub fn flip<T: Clone>(x: &[T]) -> Vec<T> {
    x.iter().rev().cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipReport {
    /// Percent.
    pub error_direct: f64,
    /// Percent.
    pub error_flipped: f64,
    /// `error_flipped / error_direct`; absent when `error_direct == 0`.
    pub ratio: Option<f64>,
    pub operator: alloc::string::String,
    pub samples: usize,
    pub image: alloc::string::String,
    pub seed: u64,
    pub converged: [bool; 2],
}

impl FlipReport {
    fn new(direct: f64, flipped: f64) -> (f64, f64, Option<f64>) {
        (direct, flipped, if direct > 0.0 { Some(flipped / direct) } else { None })
    }
}

/// Everything a flip test needs besides the signal.
#[derive(Debug, Clone)]
pub struct FlipSetup {
    /// `U`, acting on coefficients.
    pub operator: Operator,
    pub rows: Vec<usize>,
    pub eta: f64,
    pub controls: SolverControls,
    /// Coefficients to image; identity when absent.
    pub synthesis: Option<Operator>,
    pub image_id: alloc::string::String,
    pub seed: u64,
}

/// Outputs of one flip test.
#[derive(Debug, Clone)]
pub struct FlipOutcome {
    pub report: FlipReport,
    pub direct: Vec<C64>,
    pub flipped: Vec<C64>,
}

/// Recovers `x` and `flip(x)` from the same rows, unflips the second estimate
/// and compares both with `x` in image space.
pub fn run_flip_test(x: &[C64], setup: &FlipSetup) -> Result<FlipOutcome> {
    let truth = match &setup.synthesis {
        Some(s) => s.apply(x),
        None => x.to_vec(),
    };
    let recover = |coeffs: &[C64]| -> Result<(Vec<C64>, bool)> {
        let y = RecoveryProblem::measure(&setup.operator, &setup.rows, coeffs);
        let p = RecoveryProblem {
            operator: Arc::clone(&setup.operator),
            rows: setup.rows.clone(),
            measurements: y,
            eta: setup.eta,
            regularizer: Regularizer::L1,
            controls: setup.controls,
            synthesis: None,
            ground_truth: None,
        };
        let r = solve(&p)?;
        Ok((r.estimate, r.converged))
    };
    let to_image = |c: &[C64]| -> Vec<C64> {
        let img = match &setup.synthesis {
            Some(s) => s.apply(c),
            None => c.to_vec(),
        };
        img
    };
    let (a, ca) = recover(x)?;
    let (z, cz) = recover(&flip(x))?;
    let direct = to_image(&a);
    let flipped = to_image(&flip(&z));
    let err = |est: &[C64]| image_error(est, &truth);
    let (ed, ef, ratio) = FlipReport::new(err(&direct)?, err(&flipped)?);
    Ok(FlipOutcome {
        report: FlipReport {
            error_direct: ed,
            error_flipped: ef,
            ratio,
            operator: setup.operator.name(),
            samples: setup.rows.len(),
            image: setup.image_id.clone(),
            seed: setup.seed,
            converged: [ca, cz],
        },
        direct,
        flipped,
    })
}

/// Relative error in percent; real references are compared with the real
/// part of the estimate.
fn image_error(est: &[C64], truth: &[C64]) -> Result<f64> {
    if truth.iter().all(|v| v.im == 0.0) {
        let re: Vec<C64> = est.iter().map(|v| C64::new(v.re, 0.0)).collect();
        crate::solvers::relative_error(&re, truth)
    } else {
        crate::solvers::relative_error(est, truth)
    }
}

/// Evidence that a twin has the same gradient statistics as its original.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinCertificate {
    pub tv_original: f64,
    pub tv_twin: f64,
    /// `|TV′ − TV| / TV`, zero for constant images.
    pub tv_relative_gap: f64,
    /// Largest difference between the sorted magnitude lists.
    pub multiset_max_dev: f64,
    pub nonzero_original: usize,
    pub nonzero_twin: usize,
    /// Seeds tried, including the successful one.
    pub attempts: usize,
}

impl TwinCertificate {
    pub const MULTISET_TOL: f64 = 1e-6;
    pub const TV_TOL: f64 = 0.005;

    pub fn holds(&self) -> bool {
        self.multiset_max_dev <= Self::MULTISET_TOL
            && self.tv_relative_gap <= Self::TV_TOL
            && self.nonzero_original == self.nonzero_twin
    }
}

/// Compares gradient statistics of two `n × n` images.
pub fn certify(original: &[f64], twin: &[f64], n: usize, attempts: usize) -> TwinCertificate {
    let mut a = gradient_magnitudes(original, n);
    let mut b = gradient_magnitudes(twin, n);
    a.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    b.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let nz = |v: &[f64]| v.iter().filter(|&&m| m > ZERO_GRADIENT).count();
    let (t0, t1) = (tv_norm_real(original, n), tv_norm_real(twin, n));
    TwinCertificate {
        tv_original: t0,
        tv_twin: t1,
        tv_relative_gap: if t0 > 0.0 { (t1 - t0).abs() / t0 } else { t1 },
        multiset_max_dev: dev,
        nonzero_original: nz(&a),
        nonzero_twin: nz(&b),
        attempts,
    }
}

/// Gradient magnitudes at or below this count as zero.
pub const ZERO_GRADIENT: f64 = 1e-12;
const MAX_ATTEMPTS: usize = 100;

/// Twin of a piecewise-constant image: same gradient-magnitude multiset (hence
/// same TV and gradient sparsity) with the structure scattered.
///
/// Magnitudes are grouped into classes `Δ` and `√2 Δ`. Each class is realised
/// by isolated bars on a constant background, placed at seeded random
/// positions at least three pixels apart, so their gradients never interact.
/// A bar of length `L` contributes `2L` values `Δ` and one `√2 Δ` in the
/// interior, `L` and one `√2 Δ` along the top or left edge, and `L + 2`
/// values `Δ` only along the bottom or right edge. `seed = None` returns the
/// input unchanged.
pub fn permuted_gradient_image(x: &[f64], n: usize, seed: Option<u64>) -> Result<(Vec<f64>, TwinCertificate)> {
    if x.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: x.len() });
    }
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("twin construction needs pixel values in [0, 1]"));
    }
    let seed = match seed {
        None => return Ok((x.to_vec(), certify(x, x, n, 0))),
        Some(s) => s,
    };
    let mags = gradient_magnitudes(x, n);
    if mags.iter().all(|&m| m <= ZERO_GRADIENT) {
        return Ok((x.to_vec(), certify(x, x, n, 1)));
    }
    let classes = magnitude_classes(&mags)?;
    let background = pick_background(x, &classes)?;
    let pieces = plan_pieces(&classes, n)?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = substream(seed, attempt as u64);
        if let Some(img) = place(&pieces, n, background, &mut rng) {
            let cert = certify(x, &img, n, attempt + 1);
            if cert.holds() {
                return Ok((img, cert));
            }
        }
    }
    Err(Error::ConstructionFailed(alloc::format!(
        "no certified twin after {MAX_ATTEMPTS} placements"
    )))
}

/// `(Δ, count of Δ, count of √2 Δ)`.
type Class = (f64, usize, usize);

fn magnitude_classes(mags: &[f64]) -> Result<Vec<Class>> {
    let mut vals: Vec<f64> = mags.iter().copied().filter(|&m| m > ZERO_GRADIENT).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    // Distinct values with multiplicities.
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for v in vals {
        match distinct.last_mut() {
            Some((d, c)) if (v - *d).abs() <= 1e-9 * d.max(1.0) => *c += 1,
            _ => distinct.push((v, 1)),
        }
    }
    let mut used = vec![false; distinct.len()];
    let mut out = Vec::new();
    for i in 0..distinct.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (d, c) = distinct[i];
        let target = d * core::f64::consts::SQRT_2;
        let partner = (i + 1..distinct.len())
            .find(|&j| !used[j] && (distinct[j].0 - target).abs() <= 1e-9 * target.max(1.0));
        let c2 = match partner {
            Some(j) => {
                used[j] = true;
                distinct[j].1
            }
            None => 0,
        };
        out.push((d, c, c2));
    }
    Ok(out)
}

fn pick_background(x: &[f64], classes: &[Class]) -> Result<f64> {
    let mut counts: Vec<(f64, usize)> = Vec::new();
    for &v in x {
        if let Some(pos) = counts.iter().position(|(u, _)| (u - v).abs() <= 1e-12) {
            counts[pos].1 += 1;
        } else if counts.len() < 4096 {
            counts.push((v, 1));
        }
    }
    counts.sort_by(|a, b| b.1.cmp(&a.1));
    let mode = counts.first().map_or(0.5, |c| c.0);
    for b in [mode, 0.5, 0.0, 1.0] {
        if classes.iter().all(|&(d, _, _)| b + d <= 1.0 || b - d >= 0.0) {
            return Ok(b);
        }
    }
    Err(Error::ConstructionFailed("no background keeps every bar inside [0, 1]".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// `(2L, 1)`.
    Interior,
    /// Top row or left column: `(L, 1)`.
    LeadingEdge,
    /// Bottom row or right column, away from corners: `(L + 2, 0)`.
    TrailingEdge,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    kind: Kind,
    len: usize,
    delta: f64,
}

fn plan_pieces(classes: &[Class], n: usize) -> Result<Vec<Piece>> {
    let max_len = (n / 4).max(3);
    let mut pieces = Vec::new();
    for &(delta, n1, n2) in classes {
        if n1 < n2 {
            return Err(Error::ConstructionFailed(alloc::format!(
                "{n2} diagonal steps of size {delta} need at least as many axial ones, found {n1}"
            )));
        }
        // Axial values carried by the n2 diagonal-step bars; the rest goes
        // to trailing-edge bars, which take at least 3 each.
        let capacity = 2 * n2 * max_len;
        let (carried, rest) = match n1.saturating_sub(capacity) {
            0 => (n1, 0),
            r if r.max(3) <= n1 => (n1 - r.max(3), r.max(3)),
            _ => (usize::MAX, 0),
        };
        if carried == usize::MAX || n2 == 0 && carried > 0 || carried < n2 {
            return Err(Error::ConstructionFailed(alloc::format!(
                "{n1} axial and {n2} diagonal steps of size {delta} cannot be realised"
            )));
        }
        // Interior unit bars (2, 1); leading-edge bars (1, 1) while the
        // budget is short, then lengthen.
        let mut kinds: Vec<Kind> = vec![Kind::Interior; n2];
        let mut lens: Vec<usize> = vec![1; n2];
        let mut total = 2 * n2;
        let mut i = 0;
        while total > carried {
            kinds[i] = Kind::LeadingEdge;
            total -= 1;
            i += 1;
        }
        let mut extra = carried - total;
        if extra % 2 == 1 {
            // A leading-edge bar absorbs an odd remainder.
            match kinds.iter().position(|&k| k == Kind::Interior) {
                Some(j) => {
                    kinds[j] = Kind::LeadingEdge;
                    lens[j] = 3;
                }
                None => lens[0] += 1,
            }
            extra -= 1;
        }
        let mut k = 0;
        let mut idle = 0;
        while extra > 0 {
            let idx = k % n2;
            let step = if kinds[idx] == Kind::Interior { 2 } else { 1 };
            if lens[idx] < max_len && step <= extra {
                lens[idx] += 1;
                extra -= step;
                idle = 0;
            } else {
                idle += 1;
                if idle > n2 {
                    return Err(Error::ConstructionFailed("twin bars do not fit the image".into()));
                }
            }
            k += 1;
        }
        for (kind, len) in kinds.into_iter().zip(lens) {
            pieces.push(Piece { kind, len, delta });
        }
        let mut left = rest;
        while left > 0 {
            let take = if left > max_len + 2 { (max_len + 2).min(left - 3) } else { left };
            pieces.push(Piece { kind: Kind::TrailingEdge, len: take - 2, delta });
            left -= take;
        }
    }
    // Long pieces first: they are the hardest to place.
    pieces.sort_by(|a, b| b.len.cmp(&a.len));
    Ok(pieces)
}

/// Seeded placement; `None` when some piece finds no free spot.
fn place(pieces: &[Piece], n: usize, background: f64, rng: &mut crate::rng::SeededRng) -> Option<Vec<f64>> {
    let mut img = vec![background; n * n];
    // Cells within Chebyshev distance 2 of an already placed pixel.
    let mut blocked = vec![false; n * n];
    for piece in pieces {
        let mut placed = false;
        for _ in 0..400 {
            let horizontal = rng.random::<bool>();
            let l = piece.len;
            // (row, col) of the first pixel.
            let (r, c) = match (piece.kind, horizontal) {
                (Kind::Interior, true) => {
                    if l + 2 > n - 1 {
                        break;
                    }
                    (rng.random_range(1..n - 1), rng.random_range(1..n - l))
                }
                (Kind::Interior, false) => {
                    if l + 2 > n - 1 {
                        break;
                    }
                    (rng.random_range(1..n - l), rng.random_range(1..n - 1))
                }
                (Kind::LeadingEdge, true) => (0, rng.random_range(1..n.saturating_sub(l).max(2))),
                (Kind::LeadingEdge, false) => (rng.random_range(1..n.saturating_sub(l).max(2)), 0),
                (Kind::TrailingEdge, true) => (n - 1, rng.random_range(1..n.saturating_sub(l).max(2))),
                (Kind::TrailingEdge, false) => (rng.random_range(1..n.saturating_sub(l).max(2)), n - 1),
            };
            let cells: Vec<usize> = (0..l)
                .map(|t| if horizontal { (r, c + t) } else { (r + t, c) })
                .filter(|&(rr, cc)| rr < n && cc < n)
                .map(|(rr, cc)| rr * n + cc)
                .collect();
            // Edge bars must stop short of the far edge and corners.
            let (end_r, end_c) = if horizontal { (r, c + l - 1) } else { (r + l - 1, c) };
            if cells.len() != l || end_r > n - 2 && !(horizontal && r == n - 1) || end_c > n - 2 && !(!horizontal && c == n - 1) {
                continue;
            }
            if horizontal && r == n - 1 && end_c > n - 2 || !horizontal && c == n - 1 && end_r > n - 2 {
                continue;
            }
            if cells.iter().any(|&i| blocked[i]) {
                continue;
            }
            let up = background + piece.delta <= 1.0;
            let down = background - piece.delta >= 0.0;
            let sign = match (up, down) {
                (true, true) => if rng.random::<bool>() { 1.0 } else { -1.0 },
                (true, false) => 1.0,
                (false, true) => -1.0,
                (false, false) => return None,
            };
            for &i in &cells {
                img[i] = background + sign * piece.delta;
                let (ri, ci) = ((i / n) as i64, (i % n) as i64);
                for dr in -2..=2i64 {
                    for dc in -2..=2i64 {
                        let (rr, cc) = (ri + dr, ci + dc);
                        if rr >= 0 && cc >= 0 && (rr as usize) < n && (cc as usize) < n {
                            blocked[rr as usize * n + cc as usize] = true;
                        }
                    }
                }
            }
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }
    Some(img)
}

/// TV recovery of an image and of its twin from the same rows of a DFT.
pub fn run_tv_flip_test(
    image: &[f64],
    twin: &[f64],
    n: usize,
    operator: &Operator,
    rows: &[usize],
    eta: f64,
    controls: SolverControls,
    seed: u64,
) -> Result<(FlipReport, Vec<f64>, Vec<f64>)> {
    let recover = |img: &[f64]| -> Result<(Vec<f64>, f64, bool)> {
        let x = to_complex(img);
        let mut c = controls;
        c.real = true;
        let p = RecoveryProblem {
            operator: Arc::clone(operator),
            rows: rows.to_vec(),
            measurements: RecoveryProblem::measure(operator, rows, &x),
            eta,
            regularizer: Regularizer::Tv { side: n },
            controls: c,
            synthesis: None,
            ground_truth: Some(x),
        };
        let r = solve(&p)?;
        Ok((r.real_reconstruction(), r.relative_error.unwrap_or(0.0), r.converged))
    };
    let (a, ea, ca) = recover(image)?;
    let (b, eb, cb) = recover(twin)?;
    let (ed, ef, ratio) = FlipReport::new(ea, eb);
    Ok((
        FlipReport {
            error_direct: ed,
            error_flipped: ef,
            ratio,
            operator: operator.name(),
            samples: rows.len(),
            image: "tv-twin".into(),
            seed,
            converged: [ca, cb],
        },
        a,
        b,
    ))
}
