use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

use super::cells::{Cell, CellEnsemble};
use super::{CollapseError, SlipParams};
use crate::rng::substream;
use crate::Real;

/// Channel amplitudes `c_j` of the measured state `Σ_j c_j |j⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> ChannelSpec<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self, CollapseError> {
        if amplitudes.len() < 2 {
            return Err(CollapseError::InvalidChannels(format!("need at least 2 channels, got {}", amplitudes.len())));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr().to_f64_lossy()).sum();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(CollapseError::InvalidChannels(format!("Σ|c_j|² = {norm}, expected 1")));
        }
        Ok(ChannelSpec { amplitudes })
    }

    /// Real non-negative amplitudes `c_j = √p_j`.
    pub fn from_probabilities(p: &[T]) -> Result<Self, CollapseError> {
        if p.iter().any(|&v| !(v >= T::zero())) {
            return Err(CollapseError::InvalidChannels("probabilities must be non-negative".into()));
        }
        Self::new(p.iter().map(|&v| Complex::new(v.sqrt(), T::zero())).collect())
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn n_channels(&self) -> usize {
        self.amplitudes.len()
    }
}

/// How initial counts are placed in each cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Occupancy {
    /// Every atom belongs to some channel.
    #[default]
    Full,
    /// Only the entangled share `N_β · mean(1 − f₀)` is counted.
    Entangled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseScenario<T> {
    pub channels: ChannelSpec<T>,
    pub cells: Vec<Cell<T>>,
    pub params: SlipParams<T>,
    pub t_max: T,
    /// Times at which global `p_j` is recorded.
    pub checkpoints: Vec<T>,
    pub occupancy: Occupancy,
}

impl<T: Real> CollapseScenario<T> {
    /// One cell of `atoms` atoms with the same `f` for every channel.
    pub fn single_cell(channels: ChannelSpec<T>, atoms: u64, f: T, params: SlipParams<T>, t_max: T) -> Self {
        let f = vec![f; channels.n_channels()];
        CollapseScenario {
            cells: vec![Cell::uniform(0, atoms, &f)],
            channels,
            params,
            t_max,
            checkpoints: Vec::new(),
            occupancy: Occupancy::Full,
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<T>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn validate(&self) -> Result<(), CollapseError> {
        if !(self.t_max.is_finite() && self.t_max >= T::zero()) {
            return Err(CollapseError::InvalidParams(format!("t_max must be non-negative, got {}", self.t_max)));
        }
        if self.checkpoints.iter().any(|&t| !(t >= T::zero() && t <= self.t_max)) {
            return Err(CollapseError::InvalidParams("checkpoints must lie in [0, t_max]".into()));
        }
        if self.cells.iter().any(|c| c.n_channels() != self.channels.n_channels()) {
            return Err(CollapseError::ShapeMismatch("cell profiles disagree with the channel count".into()));
        }
        self.initial_ensemble().map(|_| ())
    }

    pub fn initial_ensemble(&self) -> Result<CellEnsemble<T>, CollapseError> {
        let p = self.channels.probabilities();
        match self.occupancy {
            Occupancy::Full => CellEnsemble::from_probabilities(self.cells.clone(), &p, self.params),
            Occupancy::Entangled => CellEnsemble::from_entangled_fraction(self.cells.clone(), &p, self.params),
        }
    }

    fn max_steps(&self) -> u64 {
        (self.t_max / self.params.dt).ceil().to_u64().unwrap_or(u64::MAX)
    }

    fn checkpoint_steps(&self) -> Vec<u64> {
        self.checkpoints.iter().map(|&t| (t / self.params.dt).ceil().to_u64().unwrap_or(u64::MAX)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Collapsed(usize),
    Timeout,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseRunResult<T> {
    pub seed: u64,
    pub trial: u64,
    /// `(t, p(t))` at every scenario checkpoint.
    pub trajectory: Vec<(T, Vec<T>)>,
    pub outcome: Outcome,
    /// Time of collapse, or `t_max` on timeout.
    pub collapse_time: T,
    pub steps: u64,
    pub slip_count: u64,
    pub final_counts: Vec<u64>,
}

pub fn run_collapse<T: Real>(scenario: &CollapseScenario<T>, seed: u64) -> Result<CollapseRunResult<T>, CollapseError> {
    run_trial(scenario, seed, 0)
}

/// One trial; cell `β` draws from `substream(seed, trial, β)`.
pub fn run_trial<T: Real>(
    scenario: &CollapseScenario<T>,
    seed: u64,
    trial: u64,
) -> Result<CollapseRunResult<T>, CollapseError> {
    scenario.validate()?;
    let mut ensemble = scenario.initial_ensemble()?;
    let mut rngs: Vec<ChaCha8Rng> = (0..ensemble.cells.len() as u64).map(|b| substream(seed, trial, b)).collect();
    let marks = scenario.checkpoint_steps();
    let max_steps = scenario.max_steps();
    let mut trajectory = Vec::with_capacity(marks.len());
    let mut next_mark = 0;
    let mut record = |step: u64, ens: &CellEnsemble<T>, trajectory: &mut Vec<(T, Vec<T>)>, until: u64| {
        while next_mark < marks.len() && marks[next_mark] <= until.max(step) {
            trajectory.push((scenario.checkpoints[next_mark], ens.global_probabilities()));
            next_mark += 1;
        }
    };
    let mut step = 0;
    let mut slips = 0;
    let mut outcome = ensemble.collapsed().map_or(Outcome::Timeout, Outcome::Collapsed);
    record(0, &ensemble, &mut trajectory, 0);
    while outcome == Outcome::Timeout && step < max_steps {
        slips += ensemble.step(&mut rngs).iter().map(|s| s.slips).sum::<u64>();
        step += 1;
        if let Some(k) = ensemble.collapsed() {
            outcome = Outcome::Collapsed(k);
        }
        record(step, &ensemble, &mut trajectory, step);
    }
    // a collapsed state is absorbing, so later checkpoints repeat it
    record(step, &ensemble, &mut trajectory, u64::MAX);
    let collapse_time = match outcome {
        Outcome::Collapsed(_) => T::from_u64(step).expect("step count representable") * scenario.params.dt,
        Outcome::Timeout => scenario.t_max,
    };
    Ok(CollapseRunResult {
        seed,
        trial,
        trajectory,
        outcome,
        collapse_time,
        steps: step,
        slip_count: slips,
        final_counts: ensemble.totals(),
    })
}

/// `trials` independent runs, in trial order regardless of scheduling.
pub fn run_ensemble<T: Real>(
    scenario: &CollapseScenario<T>,
    trials: u64,
    seed: u64,
) -> Result<Vec<CollapseRunResult<T>>, CollapseError> {
    scenario.validate()?;
    (0..trials).into_par_iter().map(|t| run_trial(scenario, seed, t)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointMean<T> {
    pub time: T,
    pub mean: Vec<T>,
    pub std_error: Vec<T>,
}

/// Ensemble mean and standard error of `p_j` at each checkpoint.
pub fn checkpoint_means<T: Real>(results: &[CollapseRunResult<T>]) -> Vec<CheckpointMean<T>> {
    let Some(first) = results.first() else { return Vec::new() };
    let n = T::from_usize_lossy(results.len());
    (0..first.trajectory.len())
        .map(|c| {
            let channels = first.trajectory[c].1.len();
            let mean: Vec<T> =
                (0..channels).map(|j| results.iter().map(|r| r.trajectory[c].1[j]).sum::<T>() / n).collect();
            let std_error = (0..channels)
                .map(|j| {
                    let ss: T = results.iter().map(|r| (r.trajectory[c].1[j] - mean[j]).powi(2)).sum();
                    (ss / (n - T::one()).max(T::one()) / n).sqrt()
                })
                .collect();
            CheckpointMean { time: first.trajectory[c].0, mean, std_error }
        })
        .collect()
}

/// Exact binomial band holding `Bin(trials, p)` with probability ≈ 0.9973
/// (the two-sided 3σ normal mass).
pub fn binomial_band(p: f64, trials: u64) -> (u64, u64) {
    let b = Binomial::new(p.clamp(0.0, 1.0), trials).expect("valid binomial parameters");
    (b.inverse_cdf(0.00135), b.inverse_cdf(0.99865))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BornReport<T> {
    pub trials: u64,
    pub expected: Vec<T>,
    pub counts: Vec<u64>,
    pub timeouts: u64,
    pub frequencies: Vec<T>,
    /// Acceptance bands as counts.
    pub bands: Vec<(u64, u64)>,
    pub within: Vec<bool>,
}

impl<T: Real> BornReport<T> {
    pub fn passed(&self) -> bool {
        self.timeouts == 0 && self.within.iter().all(|&b| b)
    }
}

pub fn born_rule_experiment<T: Real>(
    scenario: &CollapseScenario<T>,
    trials: u64,
    seed: u64,
) -> Result<BornReport<T>, CollapseError> {
    if trials < 100 {
        return Err(CollapseError::TooFewSamples { got: trials as usize, need: 100 });
    }
    let results = run_ensemble(scenario, trials, seed)?;
    let expected = scenario.channels.probabilities();
    let mut counts = vec![0u64; expected.len()];
    let mut timeouts = 0;
    for r in &results {
        match r.outcome {
            Outcome::Collapsed(k) => counts[k] += 1,
            Outcome::Timeout => timeouts += 1,
        }
    }
    let n = T::from_u64(trials).expect("trial count representable");
    let bands: Vec<(u64, u64)> = expected.iter().map(|p| binomial_band(p.to_f64_lossy(), trials)).collect();
    Ok(BornReport {
        trials,
        frequencies: counts.iter().map(|&c| T::from_u64(c).expect("count representable") / n).collect(),
        within: counts.iter().zip(&bands).map(|(&c, &(lo, hi))| lo <= c && c <= hi).collect(),
        expected,
        counts,
        timeouts,
        bands,
    })
}
