#![allow(dead_code)]

use std::f64::consts::PI;

use mlcs_core::rng::{gaussian_vec, seeded};
use mlcs_core::C64;

pub fn random_complex(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = seeded(seed);
    let re = gaussian_vec(&mut rng, n);
    let im = gaussian_vec(&mut rng, n);
    re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect()
}

pub fn random_real(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = seeded(seed);
    gaussian_vec(&mut rng, n).into_iter().map(|a| C64::new(a, 0.0)).collect()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Direct O(N²) unitary DFT in natural order.
pub fn naive_dft(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(1.0, -2.0 * PI * (j * k % n) as f64 / n as f64))
                .sum::<C64>()
                * s
        })
        .collect()
}

/// Sylvester-ordered ±1 Hadamard matrix, row-major.
pub fn sylvester(n: usize) -> Vec<Vec<f64>> {
    let mut h = vec![vec![1.0]];
    while h.len() < n {
        let m = h.len();
        let mut next = vec![vec![0.0; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = h[i][j];
                next[i][j + m] = h[i][j];
                next[i + m][j] = h[i][j];
                next[i + m][j + m] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

pub fn sign_changes(row: &[f64]) -> usize {
    row.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

/// Kronecker product of two row-major square matrices.
pub fn kron(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![C64::new(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Columns → row-major rows.
pub fn rows_of(cols: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n_out = cols[0].len();
    (0..n_out).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// Largest entry of |MᴴM − I| for a matrix given by columns.
pub fn gram_defect(cols: &[Vec<C64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in cols.iter().enumerate() {
        for (j, b) in cols.iter().enumerate() {
            let d: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let t = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((d - t).norm());
        }
    }
    worst
}
