use nalgebra::{DMatrix, RealField, SymmetricEigen};
use num_complex::Complex;
use num_traits::Float;

use super::{sorted_eigenvalues, HermitianSample, IncoherenceError};
use crate::Real;

/// `Δρ = ρ₊ − ρ₋` with both parts positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationSplit<T: RealField> {
    pub rho_plus: DMatrix<Complex<T>>,
    pub rho_minus: DMatrix<Complex<T>>,
    pub w_plus: T,
    pub w_minus: T,
    /// Eigenvalues within `10⁻¹² ‖m‖` of zero, assigned to neither part.
    pub zero_modes: usize,
}

fn check_hermitian<T: Real + RealField>(m: &DMatrix<Complex<T>>) -> Result<(), IncoherenceError> {
    if m.nrows() != m.ncols() {
        return Err(IncoherenceError::NotSquare(m.nrows(), m.ncols()));
    }
    let n = m.nrows();
    let mut scale = T::zero();
    let mut asym = T::zero();
    for i in 0..n {
        for j in i..n {
            scale = Float::max(scale, m[(i, j)].norm());
            asym = Float::max(asym, (m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if asym > <T as Float>::epsilon() * T::lit(1e3) * Float::max(scale, T::one()) {
        return Err(IncoherenceError::NotHermitian(asym.to_f64_lossy()));
    }
    Ok(())
}

fn zero_threshold<T: Real>(eigs: impl Iterator<Item = T>) -> T {
    let norm = eigs.fold(T::zero(), |acc, q| Float::max(acc, Float::abs(q)));
    norm * T::lit(1e-12)
}

/// Spectral split of a Hermitian matrix into positive and negative parts.
pub fn split_signed<T: Real + RealField>(m: &DMatrix<Complex<T>>) -> Result<FluctuationSplit<T>, IncoherenceError> {
    check_hermitian(m)?;
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let thr = zero_threshold(eig.eigenvalues.iter().copied());
    let mut rho_plus = DMatrix::zeros(n, n);
    let mut rho_minus = DMatrix::zeros(n, n);
    let (mut w_plus, mut w_minus, mut zero_modes) = (T::zero(), T::zero(), 0);
    for (k, &q) in eig.eigenvalues.iter().enumerate() {
        if Float::abs(q) <= thr {
            zero_modes += 1;
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let outer = &v * v.adjoint();
        if q > T::zero() {
            rho_plus += outer * Complex::new(q, T::zero());
            w_plus += q;
        } else {
            rho_minus += outer * Complex::new(-q, T::zero());
            w_minus -= q;
        }
    }
    Ok(FluctuationSplit {
        rho_plus,
        rho_minus,
        w_plus,
        w_minus,
        zero_modes,
    })
}

/// `(Tr ρ₊, Tr ρ₋)` from the eigenvalues alone.
pub fn signed_traces<T: Real + RealField>(m: &DMatrix<Complex<T>>) -> Result<(T, T), IncoherenceError> {
    check_hermitian(m)?;
    let eigs = sorted_eigenvalues(m);
    let thr = zero_threshold(eigs.iter().copied());
    let mut w = (T::zero(), T::zero());
    for q in eigs {
        if q > thr {
            w.0 += q;
        } else if q < -thr {
            w.1 -= q;
        }
    }
    Ok(w)
}

/// CDF of the semicircle density `√(4 − x²) / 2π` on `[−2, 2]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * std::f64::consts::PI) + (x / 2.0).asin() / std::f64::consts::PI
}

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and `cdf`.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// KS distance of the scaled spectrum `x = q′ n` (the eigenvalues of `Ω`)
/// from the semicircle law.
pub fn semicircle_distance<T: Real + RealField>(sample: &HermitianSample<T>) -> f64 {
    let xs: Vec<f64> = sample.eigenvalues().into_iter().map(|q| q.to_f64_lossy()).collect();
    ks_distance(&xs, semicircle_cdf)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumStats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub trace: f64,
    /// `variance / mean²`, 1 for an exponential law.
    pub variance_over_mean_sq: f64,
    /// `variance / mean`, the literal reading `(Δp′)² = p′`.
    pub variance_over_mean: f64,
}

pub fn spectrum_statistics(eigs: &[f64]) -> SpectrumStats {
    let n = eigs.len() as f64;
    let trace: f64 = eigs.iter().sum();
    let mean = trace / n;
    let variance = eigs.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (n - 1.0);
    SpectrumStats {
        mean,
        variance,
        trace,
        variance_over_mean_sq: variance / (mean * mean),
        variance_over_mean: variance / mean,
    }
}
