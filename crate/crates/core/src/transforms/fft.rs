//! Radix-2 FFT and the unitary DFT operators built on it.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::LinearOperator;
use crate::error::{check_pow2, Result};
use crate::C64;

/// Precomputed twiddles and bit-reversal table for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    twiddles: Vec<C64>,
    inv_twiddles: Vec<C64>,
    rev: Vec<u32>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        check_pow2(n)?;
        let bits = n.trailing_zeros();
        let twiddles: Vec<C64> = (0..n / 2)
            .map(|k| C64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        let inv_twiddles = twiddles.iter().map(|w| w.conj()).collect();
        let rev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Ok(FftPlan { n, twiddles, inv_twiddles, rev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalised transform: `X_k = Σ x_j e^{∓2πijk/n}` (minus sign when
    /// `inverse` is false).
    pub fn process(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.rev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let tw = if inverse { &self.inv_twiddles } else { &self.twiddles };
        // Length-2 butterflies need no twiddles.
        if n >= 2 {
            for pair in data.chunks_exact_mut(2) {
                let (a, b) = (pair[0], pair[1]);
                pair[0] = a + b;
                pair[1] = a - b;
            }
        }
        let mut len = 4;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for block in data.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = *b * tw[k * step];
                    *b = *a - t;
                    *a += t;
                }
            }
            len <<= 1;
        }
    }

    /// Unitary forward (`inverse = false`) or inverse transform.
    pub fn unitary(&self, data: &mut [C64], inverse: bool) {
        self.process(data, inverse);
        let s = 1.0 / (self.n as f64).sqrt();
        for z in data.iter_mut() {
            *z *= s;
        }
    }
}

/// Row ordering of DFT outputs.
///
/// `Centered` puts frequency `f ∈ [-N/2, N/2)` at index `f + N/2`.
/// `Magnitude` interleaves `0, -1, 1, -2, 2, …, -N/2`, i.e. `f ≥ 0` sits at
/// `2f` and `f < 0` at `2|f| - 1`, so index order is non-decreasing in `|f|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreqOrdering {
    Natural,
    Centered,
    Magnitude,
}

impl FreqOrdering {
    /// Signed frequency at output index `i`.
    pub fn frequency(self, n: usize, i: usize) -> i64 {
        let h = (n / 2) as i64;
        match self {
            FreqOrdering::Natural => {
                let i = i as i64;
                if i < h { i } else { i - n as i64 }
            }
            FreqOrdering::Centered => i as i64 - h,
            FreqOrdering::Magnitude => {
                if i % 2 == 0 { (i / 2) as i64 } else { -((i as i64 + 1) / 2) }
            }
        }
    }

    /// Output index holding signed frequency `f ∈ [-N/2, N/2)`.
    pub fn position(self, n: usize, f: i64) -> usize {
        let h = (n / 2) as i64;
        match self {
            FreqOrdering::Natural => f.rem_euclid(n as i64) as usize,
            FreqOrdering::Centered => (f + h) as usize,
            FreqOrdering::Magnitude => {
                if f >= 0 { (2 * f) as usize } else { (2 * (-f) - 1) as usize }
            }
        }
    }

    /// Natural (FFT output) index of output index `i`.
    pub fn natural_index(self, n: usize, i: usize) -> usize {
        self.frequency(n, i).rem_euclid(n as i64) as usize
    }

    fn table(self, n: usize) -> Vec<usize> {
        (0..n).map(|i| self.natural_index(n, i)).collect()
    }
}

/// Unitary 1D DFT, `U x = (1/√N) Σ_j x_j e^{-2πijk/N}` with reordered rows.
#[derive(Debug, Clone)]
pub struct Dft1 {
    plan: FftPlan,
    ordering: FreqOrdering,
    table: Vec<usize>,
}

impl Dft1 {
    pub fn new(n: usize, ordering: FreqOrdering) -> Result<Self> {
        Ok(Dft1 { plan: FftPlan::new(n)?, ordering, table: ordering.table(n) })
    }

    pub fn ordering(&self) -> FreqOrdering {
        self.ordering
    }
}

impl LinearOperator for Dft1 {
    fn dim_in(&self) -> usize {
        self.plan.n
    }
    fn dim_out(&self) -> usize {
        self.plan.n
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let mut buf = x.to_vec();
        self.plan.unitary(&mut buf, false);
        for (o, &k) in out.iter_mut().zip(&self.table) {
            *o = buf[k];
        }
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        for (&v, &k) in y.iter().zip(&self.table) {
            out[k] = v;
        }
        self.plan.unitary(out, true);
    }
    fn name(&self) -> String {
        alloc::format!("dft1[{}:{:?}]", self.plan.n, self.ordering)
    }
    fn is_isometry(&self) -> bool {
        true
    }
    fn is_coisometry(&self) -> bool {
        true
    }
}

/// Unitary 2D DFT on an `n × n` row-major grid; each axis uses `ordering`.
#[derive(Debug, Clone)]
pub struct Dft2 {
    plan: FftPlan,
    ordering: FreqOrdering,
    table: Vec<usize>,
}

impl Dft2 {
    pub fn new(n: usize, ordering: FreqOrdering) -> Result<Self> {
        Ok(Dft2 { plan: FftPlan::new(n)?, ordering, table: ordering.table(n) })
    }

    pub fn side(&self) -> usize {
        self.plan.n
    }

    pub fn ordering(&self) -> FreqOrdering {
        self.ordering
    }

    fn transform(&self, buf: &mut [C64], inverse: bool) {
        fft2_inplace(&self.plan, buf, inverse);
        let s = 1.0 / self.plan.n as f64;
        for z in buf.iter_mut() {
            *z *= s;
        }
    }
}

/// Unnormalised separable 2D FFT of a row-major `n × n` array.
pub fn fft2_inplace(plan: &FftPlan, buf: &mut [C64], inverse: bool) {
    let n = plan.n;
    for row in buf.chunks_exact_mut(n) {
        plan.process(row, inverse);
    }
    let mut t = vec![C64::new(0.0, 0.0); n * n];
    transpose(buf, &mut t, n);
    for row in t.chunks_exact_mut(n) {
        plan.process(row, inverse);
    }
    transpose(&t, buf, n);
}

/// `dst = srcᵀ` for row-major `n × n` arrays, in cache-sized tiles.
pub(crate) fn transpose<T: Copy>(src: &[T], dst: &mut [T], n: usize) {
    const TILE: usize = 32;
    for bi in (0..n).step_by(TILE) {
        for bj in (0..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                for j in bj..(bj + TILE).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

impl LinearOperator for Dft2 {
    fn dim_in(&self) -> usize {
        self.plan.n * self.plan.n
    }
    fn dim_out(&self) -> usize {
        self.dim_in()
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let n = self.plan.n;
        let mut buf = x.to_vec();
        self.transform(&mut buf, false);
        for i in 0..n {
            let src = self.table[i] * n;
            for j in 0..n {
                out[i * n + j] = buf[src + self.table[j]];
            }
        }
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let n = self.plan.n;
        for i in 0..n {
            let dst = self.table[i] * n;
            for j in 0..n {
                out[dst + self.table[j]] = y[i * n + j];
            }
        }
        self.transform(out, true);
    }
    fn name(&self) -> String {
        let mut s = "dft2[".to_string();
        s.push_str(&alloc::format!("{}:{:?}]", self.plan.n, self.ordering));
        s
    }
    fn is_isometry(&self) -> bool {
        true
    }
    fn is_coisometry(&self) -> bool {
        true
    }
}
