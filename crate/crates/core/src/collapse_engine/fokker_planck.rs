use super::CollapseError;
use crate::Real;

/// Discretization of `[0, 1]` into `intervals` cells of width `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpGrid<T> {
    pub intervals: usize,
    /// Time step; `None` picks 90% of the stability limit.
    pub dt: Option<T>,
    /// Standard deviation of the initial bump, in grid cells.
    pub bump_width: T,
    /// Number of evenly spaced history records.
    pub records: usize,
}

impl<T: Real> Default for FpGrid<T> {
    fn default() -> Self {
        FpGrid { intervals: 200, dt: None, bump_width: T::lit(2.0), records: 100 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpRecord<T> {
    pub time: T,
    pub interior: T,
    pub absorbed_low: T,
    pub absorbed_high: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FokkerPlanckResult<T> {
    pub nodes: Vec<T>,
    pub density: Vec<T>,
    pub absorbed_low: T,
    pub absorbed_high: T,
    pub interior_mass: T,
    pub initial_mean: T,
    pub time: T,
    pub dt: T,
    pub steps: usize,
    pub history: Vec<FpRecord<T>>,
}

impl<T: Real> FokkerPlanckResult<T> {
    pub fn total_mass(&self) -> T {
        self.interior_mass + self.absorbed_low + self.absorbed_high
    }
}

/// `a(p) = κ p (1 − p)` for a uniform single cell whose Monte Carlo step
/// variance is `2 a δt`: `κ = W f (1 − f) / (N τ)` when both channels share `f`.
pub fn matched_kappa<T: Real>(w: T, tau: T, atoms: u64, f: T) -> T {
    w * f * (T::one() - f) / (T::from_u64(atoms).expect("count representable") * tau)
}

/// Explicit conservative scheme for `∂Φ/∂t = ∂²[κ p(1−p) Φ]/∂p²` with
/// `Φ = 0` at both ends. Mass leaving the interior is booked as absorbed at
/// `p = 0` or `p = 1`.
pub fn fokker_planck_2ch<T: Real>(
    p0: T,
    kappa: T,
    grid: &FpGrid<T>,
    t_final: T,
) -> Result<FokkerPlanckResult<T>, CollapseError> {
    if !(p0 > T::zero() && p0 < T::one()) {
        return Err(CollapseError::InvalidParams(format!("p0 must lie in (0, 1), got {p0}")));
    }
    if !(kappa.is_finite() && kappa > T::zero()) {
        return Err(CollapseError::InvalidParams(format!("kappa must be positive, got {kappa}")));
    }
    if !(t_final.is_finite() && t_final >= T::zero()) {
        return Err(CollapseError::InvalidParams(format!("t_final must be non-negative, got {t_final}")));
    }
    if grid.intervals < 8 {
        return Err(CollapseError::InvalidParams("need at least 8 grid intervals".into()));
    }
    if !(grid.bump_width > T::zero()) {
        return Err(CollapseError::InvalidParams("bump width must be positive".into()));
    }
    let n = grid.intervals;
    let h = T::one() / T::from_usize_lossy(n);
    let limit = h * h / (T::lit(2.0) * kappa / T::lit(4.0));
    let dt = grid.dt.unwrap_or(T::lit(0.9) * limit);
    if !(dt > T::zero() && dt <= limit) {
        return Err(CollapseError::Cfl { dt: dt.to_f64_lossy(), limit: limit.to_f64_lossy() });
    }
    let nodes: Vec<T> = (0..=n).map(|i| T::from_usize_lossy(i) * h).collect();
    let a: Vec<T> = nodes.iter().map(|&p| kappa * p * (T::one() - p)).collect();
    let mut phi = initial_bump(p0, n, grid.bump_width);
    let interior = |phi: &[T]| phi.iter().copied().sum::<T>() * h;
    let initial_mean = phi.iter().zip(&nodes).map(|(&f, &p)| f * p).sum::<T>() * h;

    let steps = (t_final / dt).ceil().to_usize().unwrap_or(0);
    let record_every = (steps / grid.records.max(1)).max(1);
    let r = dt / (h * h);
    let mut g = vec![T::zero(); n + 1];
    let (mut low, mut high) = (T::zero(), T::zero());
    let mut history = vec![FpRecord { time: T::zero(), interior: interior(&phi), absorbed_low: low, absorbed_high: high }];
    for s in 1..=steps {
        for i in 1..n {
            g[i] = a[i] * phi[i];
        }
        low = low + dt * g[1] / h;
        high = high + dt * g[n - 1] / h;
        for i in 1..n {
            phi[i] = phi[i] + r * (g[i + 1] - T::lit(2.0) * g[i] + g[i - 1]);
        }
        if s % record_every == 0 || s == steps {
            history.push(FpRecord {
                time: T::from_usize_lossy(s) * dt,
                interior: interior(&phi),
                absorbed_low: low,
                absorbed_high: high,
            });
        }
    }
    Ok(FokkerPlanckResult {
        interior_mass: interior(&phi),
        density: phi,
        nodes,
        absorbed_low: low,
        absorbed_high: high,
        initial_mean,
        time: T::from_usize_lossy(steps) * dt,
        dt,
        steps,
        history,
    })
}

/// Unit-mass density: `p0` split linearly between its two neighbouring nodes,
/// each share spread by a discrete Gaussian. Away from the ends the mean is
/// exactly `p0`.
fn initial_bump<T: Real>(p0: T, n: usize, width: T) -> Vec<T> {
    let h = T::one() / T::from_usize_lossy(n);
    let x = p0 / h;
    let i0 = x.floor().to_usize().unwrap_or(0);
    let frac = x - x.floor();
    let reach = (width * T::lit(4.0)).ceil().to_usize().unwrap_or(1).max(1);
    let kernel: Vec<T> = (0..=2 * reach)
        .map(|k| {
            let d = T::from_usize_lossy(k) - T::from_usize_lossy(reach);
            (-(d * d) / (T::lit(2.0) * width * width)).exp()
        })
        .collect();
    let mut phi = vec![T::zero(); n + 1];
    for (base, share) in [(i0, T::one() - frac), (i0 + 1, frac)] {
        for (k, &w) in kernel.iter().enumerate() {
            let i = base as isize + k as isize - reach as isize;
            if i >= 1 && i < n as isize {
                phi[i as usize] = phi[i as usize] + share * w;
            }
        }
    }
    let mass: T = phi.iter().copied().sum::<T>() * h;
    phi.iter_mut().for_each(|v| *v = *v / mass);
    phi
}
