//! Random-matrix statistics of density-matrix fluctuations.
//!
//! A fluctuation `Δρ` is modelled as `Ω / n` with `Ω` a normalized Wigner
//! matrix (`E|ω|² = 1/n`, spectrum on `[−2, 2]`). Its positive and negative
//! spectral parts give the incoherence weights `w± = Tr ρ±`, which approach
//! `4/(3π)` as `n` grows.

mod environment;
mod spectral;

use nalgebra::{DMatrix, RealField};
use num_traits::Float;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

pub use environment::{environment_rates, EnvironmentParams, EnvironmentRates};
pub use spectral::{
    ks_distance, semicircle_cdf, semicircle_distance, signed_traces, spectrum_statistics, split_signed,
    FluctuationSplit, SpectrumStats,
};

use crate::rng::substream;
use crate::Real;

/// `∫₀² x √(4 − x²) / 2π dx`, the large-`n` limit of `Tr ρ₊`.
pub const INCOHERENCE_BOUND: f64 = 4.0 / (3.0 * std::f64::consts::PI);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IncoherenceError {
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("matrix must be square, got {0}×{1}")]
    NotSquare(usize, usize),
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("need at least one sample")]
    NoSamples,
    #[error("environment parameter `{0}` must be positive, got {1}")]
    NonPositive(&'static str, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ensemble {
    /// Complex Hermitian Wigner matrix.
    Wigner,
    /// Real symmetric Wigner matrix.
    WignerReal,
    /// Haar-rotated diagonal of i.i.d. exponential eigenvalues with mean `1/n`.
    ExponentialSpectrum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianSample<T: RealField> {
    pub n: usize,
    pub matrix: DMatrix<Complex<T>>,
    pub ensemble: Ensemble,
    /// Eigenvalues the matrix was built from, when drawn directly.
    pub drawn_spectrum: Option<Vec<T>>,
}

impl<T: Real + RealField> HermitianSample<T> {
    /// The density-matrix fluctuation `Δρ = Ω / n`.
    pub fn fluctuation(&self) -> DMatrix<Complex<T>> {
        let scale = Complex::new(T::one() / T::from_usize_lossy(self.n), T::zero());
        &self.matrix * scale
    }

    /// `Ω − (Tr Ω / n) 1`.
    pub fn traceless(&self) -> DMatrix<Complex<T>> {
        let shift = self.matrix.trace() / Complex::new(T::from_usize_lossy(self.n), T::zero());
        let mut m = self.matrix.clone();
        for i in 0..self.n {
            m[(i, i)] -= shift;
        }
        m
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        sorted_eigenvalues(&self.matrix)
    }
}

/// Ascending eigenvalues of a Hermitian matrix, computed in double precision.
pub(crate) fn sorted_eigenvalues<T: Real + RealField>(m: &DMatrix<Complex<T>>) -> Vec<T> {
    let n = m.nrows();
    let a = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
    });
    let mut eig = a
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("Hermitian eigenvalue iteration converges");
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    eig.into_iter().map(T::lit).collect()
}

fn normal<T: Real>(rng: &mut impl Rng, sd: f64) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z * sd)
}

/// Wigner matrix with entry variance `1/n`, reproducible from `seed`.
pub fn sample_wigner<T: Real + RealField>(n: usize, seed: u64) -> Result<HermitianSample<T>, IncoherenceError> {
    sample_wigner_ensemble(n, seed, Ensemble::Wigner)
}

pub fn sample_wigner_ensemble<T: Real + RealField>(
    n: usize,
    seed: u64,
    ensemble: Ensemble,
) -> Result<HermitianSample<T>, IncoherenceError> {
    if n < 2 {
        return Err(IncoherenceError::DimensionTooSmall(n));
    }
    let mut rng = substream(seed, 0, 0);
    let sd = (1.0 / n as f64).sqrt();
    let half = (0.5 / n as f64).sqrt();
    let mut m = DMatrix::<Complex<T>>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex::new(normal(&mut rng, sd), T::zero());
        for j in i + 1..n {
            let w = match ensemble {
                Ensemble::WignerReal => Complex::new(normal(&mut rng, sd), T::zero()),
                _ => Complex::new(normal(&mut rng, half), normal(&mut rng, half)),
            };
            m[(i, j)] = w;
            m[(j, i)] = w.conj();
        }
    }
    let ensemble = match ensemble {
        Ensemble::WignerReal => Ensemble::WignerReal,
        _ => Ensemble::Wigner,
    };
    Ok(HermitianSample {
        n,
        matrix: m,
        ensemble,
        drawn_spectrum: None,
    })
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<T: Real + RealField>(n: usize, rng: &mut impl Rng) -> DMatrix<Complex<T>> {
    let half = 0.5f64.sqrt();
    let g = DMatrix::<Complex<T>>::from_fn(n, n, |_, _| Complex::new(normal(rng, half), normal(rng, half)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > T::zero() {
            d / Complex::new(norm, T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U diag(λ) U†` with `λ_k` i.i.d. exponential of mean `1/n` and Haar `U`.
pub fn sample_exponential_spectrum<T: Real + RealField>(
    n: usize,
    seed: u64,
) -> Result<HermitianSample<T>, IncoherenceError> {
    if n < 2 {
        return Err(IncoherenceError::DimensionTooSmall(n));
    }
    let mut rng = substream(seed, 0, 1);
    let law = Exp::new(n as f64).expect("positive rate");
    let spectrum: Vec<T> = (0..n).map(|_| T::lit(law.sample(&mut rng))).collect();
    let u = haar_unitary::<T>(n, &mut rng);
    let mut scaled = u.clone();
    for (j, &lam) in spectrum.iter().enumerate() {
        let s = Complex::new(lam, T::zero());
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    let mut m = scaled * u.adjoint();
    // remove rounding asymmetry so the sample is exactly Hermitian
    for i in 0..n {
        m[(i, i)] = Complex::new(m[(i, i)].re, T::zero());
        for j in i + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * Complex::new(T::lit(0.5), T::zero());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    Ok(HermitianSample {
        n,
        matrix: m,
        ensemble: Ensemble::ExponentialSpectrum,
        drawn_spectrum: Some(spectrum),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightEstimate<T> {
    pub mean: T,
    pub std_error: T,
    /// `(seed, w_plus, w_minus)` per sample, in seed order.
    pub samples: Vec<(u64, T, T)>,
}

/// Mean of `Tr ρ₊` for `Δρ = Ω / n` over `samples` Wigner draws.
///
/// With `traceless` set, the trace of each `Ω` is projected out first so
/// that `w₊ = w₋`; otherwise the two differ by `Tr Ω / n`, of order `1/n`.
pub fn incoherence_weight<T: Real + RealField>(
    samples: usize,
    n: usize,
    seed: u64,
    traceless: bool,
) -> Result<WeightEstimate<T>, IncoherenceError> {
    if samples == 0 {
        return Err(IncoherenceError::NoSamples);
    }
    if n < 2 {
        return Err(IncoherenceError::DimensionTooSmall(n));
    }
    let draws: Vec<(u64, T, T)> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let sample_seed = crate::rng::substream_seed(seed, k, n as u64);
            let s = sample_wigner::<T>(n, sample_seed).expect("n checked");
            let omega = if traceless { s.traceless() } else { s.matrix.clone() };
            let scale = T::one() / T::from_usize_lossy(n);
            let (wp, wm) = signed_traces(&omega).expect("Hermitian by construction");
            (sample_seed, wp * scale, wm * scale)
        })
        .collect();
    let m = T::from_usize_lossy(samples);
    let mean = draws.iter().map(|d| d.1).sum::<T>() / m;
    let std_error = if samples > 1 {
        let var = draws.iter().map(|d| (d.1 - mean) * (d.1 - mean)).sum::<T>() / (m - T::one());
        Float::sqrt(var / m)
    } else {
        T::zero()
    };
    Ok(WeightEstimate {
        mean,
        std_error,
        samples: draws,
    })
}
