//! Fast Walsh-Hadamard transform in natural (Sylvester) or sequency order.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::LinearOperator;
use crate::error::{check_pow2, Result};
use crate::C64;

/// Row ordering of the Hadamard matrix. In `Sequency` order row `s` has
/// exactly `s` sign changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HadamardOrdering {
    Natural,
    Sequency,
}

/// Natural row index of the Walsh function with sequency `s`.
pub fn sequency_to_natural(n: usize, s: usize) -> usize {
    let bits = n.trailing_zeros();
    if bits == 0 {
        return 0;
    }
    let gray = (s ^ (s >> 1)) as u64;
    (gray.reverse_bits() >> (64 - bits)) as usize
}

/// Unnormalised in-place FWHT in natural order (entries of `H` are ±1).
pub fn fwht_inplace(data: &mut [C64]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for k in start..start + h {
                let a = data[k];
                let b = data[k + h];
                data[k] = a + b;
                data[k + h] = a - b;
            }
        }
        h <<= 1;
    }
}

fn table(n: usize, ordering: HadamardOrdering) -> Vec<usize> {
    match ordering {
        HadamardOrdering::Natural => (0..n).collect(),
        HadamardOrdering::Sequency => (0..n).map(|s| sequency_to_natural(n, s)).collect(),
    }
}

/// Orthonormal 1D Walsh-Hadamard transform, `H/√N`.
#[derive(Debug, Clone)]
pub struct Hadamard1 {
    n: usize,
    ordering: HadamardOrdering,
    table: Vec<usize>,
}

impl Hadamard1 {
    pub fn new(n: usize, ordering: HadamardOrdering) -> Result<Self> {
        check_pow2(n)?;
        Ok(Hadamard1 { n, ordering, table: table(n, ordering) })
    }
}

impl LinearOperator for Hadamard1 {
    fn dim_in(&self) -> usize {
        self.n
    }
    fn dim_out(&self) -> usize {
        self.n
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let mut buf = x.to_vec();
        fwht_inplace(&mut buf);
        let s = 1.0 / (self.n as f64).sqrt();
        for (o, &k) in out.iter_mut().zip(&self.table) {
            *o = buf[k] * s;
        }
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        for (&v, &k) in y.iter().zip(&self.table) {
            out[k] = v;
        }
        fwht_inplace(out);
        let s = 1.0 / (self.n as f64).sqrt();
        for z in out.iter_mut() {
            *z *= s;
        }
    }
    fn name(&self) -> String {
        alloc::format!("hadamard1[{}:{:?}]", self.n, self.ordering)
    }
    fn is_isometry(&self) -> bool {
        true
    }
    fn is_coisometry(&self) -> bool {
        true
    }
}

/// Orthonormal 2D Walsh-Hadamard transform on an `n × n` grid, same ordering
/// on both axes.
#[derive(Debug, Clone)]
pub struct Hadamard2 {
    n: usize,
    ordering: HadamardOrdering,
    table: Vec<usize>,
}

impl Hadamard2 {
    pub fn new(n: usize, ordering: HadamardOrdering) -> Result<Self> {
        check_pow2(n)?;
        Ok(Hadamard2 { n, ordering, table: table(n, ordering) })
    }

    pub fn side(&self) -> usize {
        self.n
    }
}

/// Unnormalised separable 2D FWHT of a row-major `n × n` array.
pub fn fwht2_inplace(buf: &mut [C64], n: usize) {
    for row in buf.chunks_exact_mut(n) {
        fwht_inplace(row);
    }
    // Column pass as butterflies between whole rows.
    let mut h = 1;
    while h < n {
        for block in buf.chunks_exact_mut(2 * h * n) {
            let (top, bottom) = block.split_at_mut(h * n);
            for (a, b) in top.iter_mut().zip(bottom.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h <<= 1;
    }
}

impl LinearOperator for Hadamard2 {
    fn dim_in(&self) -> usize {
        self.n * self.n
    }
    fn dim_out(&self) -> usize {
        self.n * self.n
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let n = self.n;
        let mut buf = x.to_vec();
        fwht2_inplace(&mut buf, n);
        let s = 1.0 / n as f64;
        for i in 0..n {
            let src = self.table[i] * n;
            for j in 0..n {
                out[i * n + j] = buf[src + self.table[j]] * s;
            }
        }
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            let dst = self.table[i] * n;
            for j in 0..n {
                out[dst + self.table[j]] = y[i * n + j];
            }
        }
        fwht2_inplace(out, n);
        let s = 1.0 / n as f64;
        for z in out.iter_mut() {
            *z *= s;
        }
    }
    fn name(&self) -> String {
        alloc::format!("hadamard2[{}:{:?}]", self.n, self.ordering)
    }
    fn is_isometry(&self) -> bool {
        true
    }
    fn is_coisometry(&self) -> bool {
        true
    }
}
