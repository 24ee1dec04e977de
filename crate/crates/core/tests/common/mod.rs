#![allow(dead_code)]

use penreg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Matrix {
    Matrix::new(n, p, normal_vec(rng, n * p)).unwrap()
}

/// Gaussian `n x p` matrix of rank `min(r, n, p)`.
pub fn low_rank(rng: &mut ChaCha8Rng, n: usize, p: usize, r: usize) -> Matrix {
    let a = gaussian(rng, n, r);
    let b = gaussian(rng, r, p);
    a.matmul(&b).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Columns rescaled so that `X_j'X_j / n = 1` and centered.
pub fn standardized(x: &Matrix) -> Matrix {
    let (n, p) = x.shape();
    let mut out = x.clone();
    for j in 0..p {
        let c = x.column(j);
        let m = c.iter().sum::<f64>() / n as f64;
        let s = (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
        out.set_column(j, &c.iter().map(|v| (v - m) / s).collect::<Vec<_>>());
    }
    out
}
