//! Generic operators: composition, adjoint, separable 2D extension, dense
//! matrices, random orthogonal matrices and row subsampling.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;

use super::hadamard::fwht_inplace;
use super::{LinearOperator, Operator};
use crate::error::{check_pow2, Error, Result};
use crate::rng::{gaussian_vec, seeded};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `ops[0] ∘ ops[1] ∘ … ∘ ops[k-1]`; the last operator is applied first.
#[derive(Debug, Clone)]
pub struct Compose {
    chain: Vec<Operator>,
}

impl Compose {
    pub fn chain(&self) -> &[Operator] {
        &self.chain
    }
}

/// Composes in mathematical order, checking inner dimensions.
pub fn compose(ops: Vec<Operator>) -> Result<Operator> {
    if ops.is_empty() {
        return Err(Error::invalid("cannot compose an empty operator list"));
    }
    for w in ops.windows(2) {
        if w[0].dim_in() != w[1].dim_out() {
            return Err(Error::DimensionMismatch { expected: w[0].dim_in(), found: w[1].dim_out() });
        }
    }
    if ops.len() == 1 {
        return Ok(ops.into_iter().next().expect("non-empty"));
    }
    Ok(Arc::new(Compose { chain: ops }))
}

impl LinearOperator for Compose {
    fn dim_in(&self) -> usize {
        self.chain.last().expect("non-empty").dim_in()
    }
    fn dim_out(&self) -> usize {
        self.chain[0].dim_out()
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let mut cur = x.to_vec();
        for op in self.chain[1..].iter().rev() {
            cur = op.apply(&cur);
        }
        self.chain[0].apply_into(&cur, out);
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let k = self.chain.len();
        let mut cur = y.to_vec();
        for op in &self.chain[..k - 1] {
            cur = op.adjoint(&cur);
        }
        self.chain[k - 1].adjoint_into(&cur, out);
    }
    fn name(&self) -> String {
        let parts: Vec<String> = self.chain.iter().map(|o| o.name()).collect();
        parts.join("∘")
    }
    fn is_isometry(&self) -> bool {
        self.chain.iter().all(|o| o.is_isometry())
    }
    fn is_coisometry(&self) -> bool {
        self.chain.iter().all(|o| o.is_coisometry())
    }
}

/// The adjoint of an operator as an operator.
#[derive(Debug, Clone)]
pub struct Adjoint(pub Operator);

impl LinearOperator for Adjoint {
    fn dim_in(&self) -> usize {
        self.0.dim_out()
    }
    fn dim_out(&self) -> usize {
        self.0.dim_in()
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        self.0.adjoint_into(x, out)
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        self.0.apply_into(y, out)
    }
    fn name(&self) -> String {
        alloc::format!("({})*", self.0.name())
    }
    fn is_isometry(&self) -> bool {
        self.0.is_coisometry()
    }
    fn is_coisometry(&self) -> bool {
        self.0.is_isometry()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim_in(&self) -> usize {
        self.0
    }
    fn dim_out(&self) -> usize {
        self.0
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        out.copy_from_slice(x)
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        out.copy_from_slice(y)
    }
    fn name(&self) -> String {
        alloc::format!("id[{}]", self.0)
    }
    fn is_isometry(&self) -> bool {
        true
    }
    fn is_coisometry(&self) -> bool {
        true
    }
}

/// Separable extension `A ⊗ A` of a square 1D operator to row-major `n × n`
/// grids: `A` along every row, then along every column.
#[derive(Debug, Clone)]
pub struct Tensor2d {
    op: Operator,
    n: usize,
}

pub fn tensor2d(op: Operator) -> Result<Operator> {
    let n = op.dim_in();
    if op.dim_out() != n {
        return Err(Error::DimensionMismatch { expected: n, found: op.dim_out() });
    }
    Ok(Arc::new(Tensor2d { op, n }))
}

impl Tensor2d {
    fn run(&self, x: &[C64], out: &mut [C64], adjoint: bool) {
        let n = self.n;
        let f = |v: &[C64], o: &mut [C64]| {
            if adjoint {
                self.op.adjoint_into(v, o)
            } else {
                self.op.apply_into(v, o)
            }
        };
        let mut tmp = vec![ZERO; n * n];
        for i in 0..n {
            f(&x[i * n..(i + 1) * n], &mut tmp[i * n..(i + 1) * n]);
        }
        let mut col = vec![ZERO; n];
        let mut res = vec![ZERO; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = tmp[i * n + j];
            }
            f(&col, &mut res);
            for i in 0..n {
                out[i * n + j] = res[i];
            }
        }
    }
}

impl LinearOperator for Tensor2d {
    fn dim_in(&self) -> usize {
        self.n * self.n
    }
    fn dim_out(&self) -> usize {
        self.n * self.n
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        self.run(x, out, false)
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        self.run(y, out, true)
    }
    fn name(&self) -> String {
        alloc::format!("tensor2d({})", self.op.name())
    }
    fn is_isometry(&self) -> bool {
        self.op.is_isometry()
    }
    fn is_coisometry(&self) -> bool {
        self.op.is_coisometry()
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone)]
pub struct MatrixOperator {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
    label: String,
    orthogonal: bool,
}

impl MatrixOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(MatrixOperator { rows, cols, data, label: "matrix".into(), orthogonal: false })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }
}

impl LinearOperator for MatrixOperator {
    fn dim_in(&self) -> usize {
        self.cols
    }
    fn dim_out(&self) -> usize {
        self.rows
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        for (i, &yi) in y.iter().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * yi;
            }
        }
    }
    fn name(&self) -> String {
        alloc::format!("{}[{}x{}]", self.label, self.rows, self.cols)
    }
    fn is_isometry(&self) -> bool {
        self.orthogonal
    }
    fn is_coisometry(&self) -> bool {
        self.orthogonal
    }
}

/// Haar-distributed real orthogonal `n × n` matrix (QR of a Gaussian matrix
/// with the signs of `R`'s diagonal absorbed into `Q`).
pub fn random_orthogonal(n: usize, seed: u64) -> Result<MatrixOperator> {
    if n == 0 {
        return Err(Error::invalid("random orthogonal matrix of size 0"));
    }
    let mut rng = seeded(seed);
    let g = gaussian_vec(&mut rng, n * n);
    // Columns of g, orthonormalised; modified Gram-Schmidt keeps R's diagonal
    // positive, which is the sign convention that makes Q Haar-distributed.
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<f64> = (0..n).map(|i| g[i * n + j]).collect();
        for _ in 0..2 {
            for u in &q {
                let c: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= c * ui;
                }
            }
        }
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= nv;
        }
        q.push(v);
    }
    let mut data = vec![ZERO; n * n];
    for (j, col) in q.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            data[i * n + j] = C64::new(v, 0.0);
        }
    }
    Ok(MatrixOperator {
        rows: n,
        cols: n,
        data,
        label: alloc::format!("random_orthogonal#{seed}"),
        orthogonal: true,
    })
}

/// Fast orthogonal operator with flat coherence: `H D P / √N` where `P` is a
/// seeded permutation, `D` a seeded ±1 diagonal and `H` the natural-order
/// Hadamard matrix.
#[derive(Debug, Clone)]
pub struct ScrambledHadamard {
    perm: Vec<usize>,
    signs: Vec<f64>,
    seed: u64,
}

impl ScrambledHadamard {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        check_pow2(n)?;
        let mut rng = seeded(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let signs = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        Ok(ScrambledHadamard { perm, signs, seed })
    }
}

impl LinearOperator for ScrambledHadamard {
    fn dim_in(&self) -> usize {
        self.perm.len()
    }
    fn dim_out(&self) -> usize {
        self.perm.len()
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let s = 1.0 / (self.perm.len() as f64).sqrt();
        for (i, o) in out.iter_mut().enumerate() {
            *o = x[self.perm[i]] * (self.signs[i] * s);
        }
        fwht_inplace(out);
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let s = 1.0 / (self.perm.len() as f64).sqrt();
        let mut buf = y.to_vec();
        fwht_inplace(&mut buf);
        for (i, v) in buf.iter().enumerate() {
            out[self.perm[i]] = v * (self.signs[i] * s);
        }
    }
    fn name(&self) -> String {
        alloc::format!("scrambled_hadamard[{}#{}]", self.perm.len(), self.seed)
    }
    fn is_isometry(&self) -> bool {
        true
    }
    fn is_coisometry(&self) -> bool {
        true
    }
}

/// `P_Ω U`: the rows of `op` listed in `rows`, in that order.
#[derive(Debug, Clone)]
pub struct Subsampled {
    op: Operator,
    rows: Vec<usize>,
}

impl Subsampled {
    pub fn new(op: Operator, rows: Vec<usize>) -> Result<Self> {
        let m = op.dim_out();
        if let Some(&bad) = rows.iter().find(|&&r| r >= m) {
            return Err(Error::invalid(alloc::format!("row {bad} out of range 0..{m}")));
        }
        let mut seen = vec![false; m];
        for &r in &rows {
            if core::mem::replace(&mut seen[r], true) {
                return Err(Error::invalid(alloc::format!("row {r} listed twice")));
            }
        }
        Ok(Subsampled { op, rows })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn inner(&self) -> &Operator {
        &self.op
    }
}

impl LinearOperator for Subsampled {
    fn dim_in(&self) -> usize {
        self.op.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.rows.len()
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let full = self.op.apply(x);
        for (o, &r) in out.iter_mut().zip(&self.rows) {
            *o = full[r];
        }
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let mut full = vec![ZERO; self.op.dim_out()];
        for (&v, &r) in y.iter().zip(&self.rows) {
            full[r] = v;
        }
        self.op.adjoint_into(&full, out);
    }
    fn name(&self) -> String {
        alloc::format!("P[{}]({})", self.rows.len(), self.op.name())
    }
    fn is_coisometry(&self) -> bool {
        self.op.is_isometry() && self.op.is_coisometry()
    }
}
