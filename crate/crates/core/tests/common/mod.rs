#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `exp(A)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
        if term.iter().all(|z| z.norm() < 1e-18) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i H t) ψ` for a dense `H`.
pub fn propagate(h: &DMatrix<Complex64>, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let u = expm(&(h * Complex64::new(0.0, -t)));
    let v = nalgebra::DVector::from_column_slice(psi);
    (u * v).iter().copied().collect()
}

pub fn dense_from_entries(dim: usize, entries: impl Iterator<Item = (usize, usize, Complex64)>) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(dim, dim);
    for (r, c, v) in entries {
        m[(r, c)] += v;
    }
    m
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn l2_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic pseudo-random normalized vector.
pub fn random_vector(dim: usize, seed: u64) -> Vec<Complex64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let n = norm(&v);
    v.into_iter().map(|z| z / n).collect()
}
