//! Explicit finite-difference solver for waves of local entanglement,
//! `∂f_j/∂t = D Δf_j + f_j f₀ / τ` with `f₀ = 1 − Σ_j p_j f_j`.

mod tracking;

use thiserror::Error;

pub use tracking::{front_position, front_position_of, front_speed, FrontSeries, SpeedFit};

use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontError {
    #[error("time step {dt} exceeds the explicit stability limit {limit}")]
    Unstable { dt: f64, limit: f64 },
    #[error("invalid front configuration: {0}")]
    InvalidConfig(String),
    #[error("channel {channel} left [0, 1] at node {node}: value {value}")]
    OutOfRange { channel: usize, node: usize, value: f64 },
    #[error("field does not reach the threshold {threshold}")]
    NoFront { threshold: f64 },
    #[error("speed fit needs at least 10 points in the window, found {0}")]
    InsufficientPoints(usize),
}

/// Values within this distance outside `[0, 1]` are clamped silently.
pub const RANGE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Planar,
    Cylindrical,
    Spherical,
}

impl Geometry {
    pub fn dimension(self) -> usize {
        match self {
            Geometry::Planar => 1,
            Geometry::Cylindrical => 2,
            Geometry::Spherical => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TimeScheme {
    #[default]
    Euler,
    Rk4,
}

/// Initial condition `f_channel = 1` on `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceRegion<T> {
    pub start: T,
    pub end: T,
    pub channel: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontConfig<T> {
    pub diffusion: T,
    pub mean_free_time: T,
    pub mean_free_path: T,
    pub geometry: Geometry,
    pub domain_length: T,
    pub dx: T,
    pub dt: T,
    pub t_final: T,
    pub sources: Vec<SourceRegion<T>>,
    /// Channel weights `p_j`; `None` means one channel with `p = 1`.
    pub channel_probs: Option<Vec<T>>,
    pub scheme: TimeScheme,
    /// Time between stored snapshots; `None` keeps only the initial and final fields.
    pub snapshot_interval: Option<T>,
}

impl<T: Real> FrontConfig<T> {
    /// Planar single-channel setup with `D = λ²/6τ` and a source on `[0, source_width]`.
    pub fn kinetic(mean_free_path: T, mean_free_time: T) -> Self {
        let lambda = mean_free_path;
        let diffusion = lambda * lambda / (T::lit(6.0) * mean_free_time);
        let dx = lambda / T::lit(10.0);
        let mut cfg = Self {
            diffusion,
            mean_free_time,
            mean_free_path,
            geometry: Geometry::Planar,
            domain_length: lambda * T::lit(100.0),
            dx,
            dt: T::zero(),
            t_final: mean_free_time * T::lit(50.0),
            sources: vec![SourceRegion {
                start: T::zero(),
                end: lambda * T::lit(2.0),
                channel: 0,
            }],
            channel_probs: None,
            scheme: TimeScheme::Euler,
            snapshot_interval: Some(mean_free_time),
        };
        cfg.dt = cfg.suggested_dt();
        cfg
    }

    /// Half of the explicit limit, further capped so the reaction term keeps
    /// the update monotone.
    pub fn suggested_dt(&self) -> T {
        let limit = self.stability_limit();
        let monotone = T::one()
            / (T::from_usize_lossy(2 * self.geometry.dimension()) * self.diffusion
                / (self.dx * self.dx)
                + T::one() / self.mean_free_time);
        (limit * T::lit(0.5)).min(monotone)
    }

    /// `dx² / (2 · dim · D)`.
    pub fn stability_limit(&self) -> T {
        self.dx * self.dx / (T::from_usize_lossy(2 * self.geometry.dimension()) * self.diffusion)
    }

    pub fn n_channels(&self) -> usize {
        self.channel_probs.as_ref().map_or(1, Vec::len)
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.channel_probs.clone().unwrap_or_else(|| vec![T::one()])
    }

    pub fn n_nodes(&self) -> usize {
        (self.domain_length / self.dx).round().to_usize().unwrap_or(0) + 1
    }

    /// Validation errors; an empty list means the config is usable.
    pub fn problems(&self) -> Vec<FrontError> {
        let mut out = Vec::new();
        let mut bad = |msg: String| out.push(FrontError::InvalidConfig(msg));
        for (name, v) in [
            ("diffusion", self.diffusion),
            ("mean_free_time", self.mean_free_time),
            ("mean_free_path", self.mean_free_path),
            ("domain_length", self.domain_length),
            ("dx", self.dx),
            ("dt", self.dt),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.t_final >= T::zero()) || !self.t_final.is_finite() {
            bad(format!("t_final must be nonnegative, got {}", self.t_final));
        }
        if self.dx > T::zero() && self.domain_length / self.dx < T::lit(2.0) {
            bad("domain must span at least two grid cells".into());
        }
        if let Some(p) = &self.channel_probs {
            let sum: T = p.iter().copied().sum();
            if p.is_empty() || p.iter().any(|&v| v < T::zero()) || (sum - T::one()).abs() > T::lit(1e-9) {
                bad(format!("channel_probs must lie on the simplex, sum = {sum}"));
            }
        }
        let n_channels = self.n_channels();
        for s in &self.sources {
            if s.channel >= n_channels {
                bad(format!("source refers to channel {} of {n_channels}", s.channel));
            }
            if !(s.start <= s.end) {
                bad(format!("source interval [{}, {}] is empty", s.start, s.end));
            }
        }
        if let Some(iv) = self.snapshot_interval {
            if !(iv > T::zero()) {
                bad(format!("snapshot_interval must be positive, got {iv}"));
            }
        }
        if out.is_empty() && self.dt > self.stability_limit() {
            out.push(FrontError::Unstable {
                dt: self.dt.to_f64_lossy(),
                limit: self.stability_limit().to_f64_lossy(),
            });
        }
        out
    }

    pub fn validate(&self) -> Result<(), FrontError> {
        match self.problems().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Whether `dx` resolves the mean free path; coarser grids still run.
    pub fn resolves_mean_free_path(&self) -> bool {
        self.dx < self.mean_free_path
    }

    pub fn node_position(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.dx
    }

    pub fn initial_field(&self) -> WaveField<T> {
        let n = self.n_nodes();
        let mut values = vec![vec![T::zero(); n]; self.n_channels()];
        for s in &self.sources {
            for (i, v) in values[s.channel].iter_mut().enumerate() {
                let x = self.node_position(i);
                if x >= s.start && x <= s.end {
                    *v = T::one();
                }
            }
        }
        WaveField::new(values, self.probabilities(), self.dx, T::zero())
    }
}

/// Channel fields `f_j` on the grid, with `f₀` derived on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField<T> {
    pub values: Vec<Vec<T>>,
    pub probs: Vec<T>,
    pub dx: T,
    pub time: T,
}

impl<T: Real> WaveField<T> {
    pub fn new(values: Vec<Vec<T>>, probs: Vec<T>, dx: T, time: T) -> Self {
        assert_eq!(values.len(), probs.len(), "one weight per channel");
        assert!(values.windows(2).all(|w| w[0].len() == w[1].len()));
        Self { values, probs, dx, time }
    }

    pub fn single(values: Vec<T>, dx: T) -> Self {
        Self::new(vec![values], vec![T::one()], dx, T::zero())
    }

    pub fn n_nodes(&self) -> usize {
        self.values[0].len()
    }

    pub fn channel(&self, j: usize) -> &[T] {
        &self.values[j]
    }

    pub fn f0_at(&self, i: usize) -> T {
        let mut f0 = T::one();
        for (vals, &p) in self.values.iter().zip(&self.probs) {
            f0 = f0 - p * vals[i];
        }
        f0
    }

    pub fn f0(&self) -> Vec<T> {
        (0..self.n_nodes()).map(|i| self.f0_at(i)).collect()
    }

    /// Trapezoidal `∫ f_j r^(dim−1) dr`.
    pub fn mass(&self, channel: usize, geometry: Geometry) -> T {
        let vals = &self.values[channel];
        let n = vals.len();
        let k = geometry.dimension() as i32 - 1;
        let mut total = T::zero();
        for (i, &v) in vals.iter().enumerate() {
            let r = T::from_usize_lossy(i) * self.dx;
            let w = if i == 0 || i + 1 == n { T::lit(0.5) } else { T::one() };
            total = total + w * v * r.powi(k);
        }
        total * self.dx
    }
}

/// Per-node Laplacian weights `(left, centre, right)` including boundaries.
#[derive(Clone, Debug)]
struct Stencil<T> {
    weights: Vec<(T, T, T)>,
}

impl<T: Real> Stencil<T> {
    fn new(n: usize, dx: T, diffusion: T, geometry: Geometry) -> Self {
        let base = diffusion / (dx * dx);
        let k = T::from_usize_lossy(geometry.dimension() - 1);
        let weights = (0..n)
            .map(|i| {
                if i == 0 {
                    // mirror ghost; in radial geometry Δf → dim·f″ at r = 0
                    let dim = T::from_usize_lossy(geometry.dimension());
                    let w = base * T::lit(2.0) * dim;
                    return (T::zero(), -w, w);
                }
                let radial = k / (T::lit(2.0) * T::from_usize_lossy(i));
                let (l, r) = (base * (T::one() - radial), base * (T::one() + radial));
                if i + 1 == n {
                    // mirror ghost f_{n} = f_{n-2}
                    (l + r, -(l + r), T::zero())
                } else {
                    (l, -(l + r), r)
                }
            })
            .collect();
        Self { weights }
    }

    fn rate(&self, field: &[Vec<T>], probs: &[T], tau: T, out: &mut [Vec<T>]) {
        let n = self.weights.len();
        for i in 0..n {
            let mut f0 = T::one();
            for (vals, &p) in field.iter().zip(probs) {
                f0 = f0 - p * vals[i];
            }
            let (wl, wc, wr) = self.weights[i];
            for (vals, o) in field.iter().zip(out.iter_mut()) {
                let left = if i > 0 { vals[i - 1] } else { T::zero() };
                let right = if i + 1 < n { vals[i + 1] } else { T::zero() };
                o[i] = wl * left + wc * vals[i] + wr * right + vals[i] * f0 / tau;
            }
        }
    }
}

struct Stepper<T> {
    stencil: Stencil<T>,
    tau: T,
    scheme: TimeScheme,
    k: Vec<Vec<Vec<T>>>,
    scratch: Vec<Vec<T>>,
}

impl<T: Real> Stepper<T> {
    fn new(cfg: &FrontConfig<T>, n: usize) -> Self {
        let channels = cfg.n_channels();
        let stages = match cfg.scheme {
            TimeScheme::Euler => 1,
            TimeScheme::Rk4 => 4,
        };
        Self {
            stencil: Stencil::new(n, cfg.dx, cfg.diffusion, cfg.geometry),
            tau: cfg.mean_free_time,
            scheme: cfg.scheme,
            k: vec![vec![vec![T::zero(); n]; channels]; stages],
            scratch: vec![vec![T::zero(); n]; channels],
        }
    }

    fn advance(&mut self, field: &mut WaveField<T>, dt: T) -> Result<(), FrontError> {
        match self.scheme {
            TimeScheme::Euler => {
                self.stencil.rate(&field.values, &field.probs, self.tau, &mut self.k[0]);
                for (vals, k) in field.values.iter_mut().zip(&self.k[0]) {
                    for (v, r) in vals.iter_mut().zip(k) {
                        *v = *v + dt * *r;
                    }
                }
            }
            TimeScheme::Rk4 => {
                let half = dt * T::lit(0.5);
                for stage in 0..4 {
                    let h = match stage {
                        0 => T::zero(),
                        1 | 2 => half,
                        _ => dt,
                    };
                    for (c, s) in self.scratch.iter_mut().enumerate() {
                        for (i, v) in s.iter_mut().enumerate() {
                            *v = field.values[c][i]
                                + if stage == 0 { T::zero() } else { h * self.k[stage - 1][c][i] };
                        }
                    }
                    let (_, rest) = self.k.split_at_mut(stage);
                    self.stencil.rate(&self.scratch, &field.probs, self.tau, &mut rest[0]);
                }
                let sixth = dt / T::lit(6.0);
                for (c, vals) in field.values.iter_mut().enumerate() {
                    for (i, v) in vals.iter_mut().enumerate() {
                        let incr = self.k[0][c][i]
                            + T::lit(2.0) * (self.k[1][c][i] + self.k[2][c][i])
                            + self.k[3][c][i];
                        *v = *v + sixth * incr;
                    }
                }
            }
        }
        field.time = field.time + dt;
        clamp(field)
    }
}

fn clamp<T: Real>(field: &mut WaveField<T>) -> Result<(), FrontError> {
    let tol = T::lit(RANGE_TOLERANCE);
    for (channel, vals) in field.values.iter_mut().enumerate() {
        for (node, v) in vals.iter_mut().enumerate() {
            if !v.is_finite() || *v < -tol || *v > T::one() + tol {
                return Err(FrontError::OutOfRange {
                    channel,
                    node,
                    value: v.to_f64_lossy(),
                });
            }
            *v = v.max(T::zero()).min(T::one());
        }
    }
    Ok(())
}

/// One explicit step of length `cfg.dt`.
pub fn step<T: Real>(field: &WaveField<T>, cfg: &FrontConfig<T>) -> Result<WaveField<T>, FrontError> {
    cfg.validate()?;
    if field.values.len() != cfg.n_channels() {
        return Err(FrontError::InvalidConfig(format!(
            "field has {} channels, config {}",
            field.values.len(),
            cfg.n_channels()
        )));
    }
    let mut next = field.clone();
    clamp(&mut next)?;
    Stepper::new(cfg, field.n_nodes()).advance(&mut next, cfg.dt)?;
    Ok(next)
}

/// Stored snapshots of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub snapshots: Vec<WaveField<T>>,
    /// Front position of channel 0 after every step, as `(time, position)`.
    pub fronts: FrontSeries<T>,
    pub steps: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn final_field(&self) -> &WaveField<T> {
        self.snapshots.last().expect("trajectory holds the initial field")
    }
}

/// Runs from the configured initial field to `t_final`.
///
/// The number of steps is `ceil(t_final / dt)`, so the step actually taken
/// never exceeds `dt` and the last field sits exactly at `t_final`.
pub fn run<T: Real>(cfg: &FrontConfig<T>) -> Result<Trajectory<T>, FrontError> {
    run_with_threshold(cfg, T::lit(0.5))
}

pub fn run_with_threshold<T: Real>(cfg: &FrontConfig<T>, threshold: T) -> Result<Trajectory<T>, FrontError> {
    cfg.validate()?;
    let mut field = cfg.initial_field();
    let n_steps = (cfg.t_final / cfg.dt).ceil().to_usize().unwrap_or(0);
    let dt = if n_steps > 0 {
        cfg.t_final / T::from_usize_lossy(n_steps)
    } else {
        T::zero()
    };
    let mut stepper = Stepper::new(cfg, field.n_nodes());
    let mut snapshots = vec![field.clone()];
    let mut fronts = FrontSeries::default();
    fronts.push(field.time, front_position_of(&field.values[0], cfg.dx, threshold).ok());
    let mut next_snapshot = cfg.snapshot_interval;
    for k in 1..=n_steps {
        stepper.advance(&mut field, dt)?;
        field.time = T::from_usize_lossy(k) * dt;
        fronts.push(field.time, front_position_of(&field.values[0], cfg.dx, threshold).ok());
        if let Some(at) = next_snapshot {
            if k < n_steps && field.time >= at - dt * T::lit(1e-6) {
                snapshots.push(field.clone());
                next_snapshot = Some(at + cfg.snapshot_interval.expect("set"));
            }
        }
    }
    if n_steps > 0 {
        snapshots.push(field);
    }
    Ok(Trajectory {
        snapshots,
        fronts,
        steps: n_steps,
    })
}
