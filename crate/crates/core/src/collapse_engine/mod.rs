//! Stochastic slips in coherence between measurement channels.
//!
//! Atoms are counted per cell and per channel (`N_kβ`). Each step draws
//! Poisson numbers of single-atom slips between channel pairs, so the total
//! count is conserved exactly and a channel dies the moment its global count
//! hits zero. The closed-form moments and the two-channel Fokker-Planck
//! equation are kept alongside as predictions to check the simulation against.

mod cells;
mod covariance;
mod fokker_planck;
mod runs;

use num_traits::Num;
use thiserror::Error;

pub use cells::{
    cell_step, cells_from_field, largest_remainder, sample_single_steps, slip_rates, Cell, CellEnsemble, CellStep,
    SlipRate, Transfer,
};
pub use covariance::{aggregate_covariance, analytic_covariance, CovarianceReport, MIN_COVARIANCE_SAMPLES};
pub use fokker_planck::{fokker_planck_2ch, matched_kappa, FokkerPlanckResult, FpGrid, FpRecord};
pub use runs::{
    binomial_band, born_rule_experiment, checkpoint_means, run_collapse, run_ensemble, run_trial, BornReport,
    ChannelSpec, CheckpointMean, CollapseRunResult, CollapseScenario, Occupancy, Outcome,
};

use crate::incoherence::INCOHERENCE_BOUND;
use crate::{ExactZero, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollapseError {
    #[error("invalid channels: {0}")]
    InvalidChannels(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("time step {dt} exceeds the explicit stability limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
}

/// Rate parameters shared by every cell: incoherence probability `W`, mean
/// free time `τ` and time step `δt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlipParams<S> {
    pub w: S,
    pub tau: S,
    pub dt: S,
}

impl<T: Real> SlipParams<T> {
    pub fn new(w: T, tau: T, dt: T) -> Self {
        SlipParams { w, tau, dt }
    }

    /// `δt = τ/100`.
    pub fn with_default_step(w: T, tau: T) -> Self {
        SlipParams { w, tau, dt: tau / T::lit(100.0) }
    }

    pub fn validate(&self) -> Result<(), CollapseError> {
        let w = self.w.to_f64_lossy();
        if !(w > 0.0 && w <= INCOHERENCE_BOUND * (1.0 + 1e-12)) {
            return Err(CollapseError::InvalidParams(format!("W = {w} must lie in (0, 4/(3π)]")));
        }
        for (name, v) in [("tau", self.tau), ("dt", self.dt)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(CollapseError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Expected count changes from fluctuations centred on channel `j`:
/// `δN_j′ = −W p_j′ p_j f_j f₀ δt/2τ · scale` for `j′ ≠ j` and
/// `δN_j = W p_j (1 − p_j) f_j f₀ δt/2τ · scale`.
///
/// `scale` carries the atom-density integral. With exact scalars the result
/// sums to zero identically whenever `p` sums to one.
pub fn slip_transfer<S>(p: &[S], j: usize, f_j: S, f0: S, params: &SlipParams<S>, scale: S) -> Vec<S>
where
    S: Num + Clone + ExactZero,
{
    let two = S::one() + S::one();
    let base = params.w.clone() * p[j].clone() * f_j * f0 * params.dt.clone() / (two * params.tau.clone()) * scale;
    let mut out: Vec<S> = p.iter().map(|pk| S::zero() - base.clone() * pk.clone()).collect();
    out[j] = base.clone() * (S::one() - p[j].clone());
    debug_assert!(
        {
            let sum = out.iter().cloned().fold(S::zero(), |a, b| a + b);
            let bound = p.iter().fold(S::zero(), |acc, _| acc + base.clone());
            S::is_negligible(&sum, &bound)
        },
        "slip transfer does not conserve atoms"
    );
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimescaleParams<T> {
    pub tau: T,
    pub l: T,
    pub n_a: T,
    pub lambda: T,
    pub w: T,
}

impl TimescaleParams<f64> {
    /// τ = 10⁻¹⁰ s, L = 1 cm, n_a = 10²⁰ cm⁻³, λ = 10⁻⁵ cm, W = 0.1.
    pub fn reference() -> Self {
        TimescaleParams { tau: 1e-10, l: 1.0, n_a: 1e20, lambda: 1e-5, w: 0.1 }
    }
}

/// Order-of-magnitude collapse time quoted in the literature for
/// [`TimescaleParams::reference`]; the formula itself gives `1e-4` s.
pub const QUOTED_ESTIMATE_SECONDS: f64 = 1e-14;

/// `τ L² / (n_a λ⁵ W)` in the units of `τ`.
pub fn collapse_timescale<T: Real>(params: &TimescaleParams<T>) -> Result<T, CollapseError> {
    let TimescaleParams { tau, l, n_a, lambda, w } = *params;
    for (name, v) in [("tau", tau), ("L", l), ("n_a", n_a), ("lambda", lambda), ("W", w)] {
        if !(v.is_finite() && v > T::zero()) {
            return Err(CollapseError::InvalidParams(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(tau * l * l / (n_a * lambda.powi(5) * w))
}
