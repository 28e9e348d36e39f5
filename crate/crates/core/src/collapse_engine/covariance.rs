use super::{CollapseError, SlipParams};
use crate::Real;

pub const MIN_COVARIANCE_SAMPLES: usize = 10_000;

/// Empirical second moments of `δp` next to the closed-form prediction
/// `⟨δp_j²⟩ = p_j(1−p_j) W C_j δt/τ`,
/// `⟨δp_j δp_j′⟩ = −p_j p_j′ W (C_j + C_j′) δt/τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceReport<T> {
    pub probabilities: Vec<T>,
    pub samples: usize,
    pub empirical: Vec<Vec<T>>,
    pub analytic: Vec<Vec<T>>,
    pub empirical_row_sums: Vec<T>,
    pub analytic_row_sums: Vec<T>,
    /// `(empirical − analytic) / |analytic|`, `None` where the prediction is zero.
    pub relative_gap: Vec<Vec<Option<T>>>,
}

pub fn analytic_covariance<T: Real>(p: &[T], coefficients: &[T], params: &SlipParams<T>) -> Vec<Vec<T>> {
    let rate = params.w * params.dt / params.tau;
    (0..p.len())
        .map(|j| {
            (0..p.len())
                .map(|k| {
                    if j == k {
                        p[j] * (T::one() - p[j]) * coefficients[j] * rate
                    } else {
                        -p[j] * p[k] * (coefficients[j] + coefficients[k]) * rate
                    }
                })
                .collect()
        })
        .collect()
}

pub fn aggregate_covariance<T: Real>(
    samples: &[Vec<T>],
    p: &[T],
    coefficients: &[T],
    params: &SlipParams<T>,
) -> Result<CovarianceReport<T>, CollapseError> {
    if samples.len() < MIN_COVARIANCE_SAMPLES {
        return Err(CollapseError::TooFewSamples { got: samples.len(), need: MIN_COVARIANCE_SAMPLES });
    }
    let n = p.len();
    if coefficients.len() != n || samples.iter().any(|s| s.len() != n) {
        return Err(CollapseError::ShapeMismatch(format!("expected {n} channels in every sample")));
    }
    let count = T::from_usize_lossy(samples.len());
    let mean: Vec<T> = (0..n).map(|j| samples.iter().map(|s| s[j]).sum::<T>() / count).collect();
    let empirical: Vec<Vec<T>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    samples.iter().map(|s| (s[j] - mean[j]) * (s[k] - mean[k])).sum::<T>() / (count - T::one())
                })
                .collect()
        })
        .collect();
    let analytic = analytic_covariance(p, coefficients, params);
    let row_sums = |m: &Vec<Vec<T>>| m.iter().map(|row| row.iter().copied().sum()).collect::<Vec<T>>();
    let relative_gap = empirical
        .iter()
        .zip(&analytic)
        .map(|(e, a)| e.iter().zip(a).map(|(&e, &a)| (a != T::zero()).then(|| (e - a) / a.abs())).collect())
        .collect();
    Ok(CovarianceReport {
        probabilities: p.to_vec(),
        samples: samples.len(),
        empirical_row_sums: row_sums(&empirical),
        analytic_row_sums: row_sums(&analytic),
        empirical,
        analytic,
        relative_gap,
    })
}
