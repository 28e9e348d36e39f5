use super::{FrontError, Trajectory, WaveField};
use crate::Real;

/// Outermost crossing of `threshold`, linearly interpolated between nodes.
///
/// A field at or above the threshold up to the last node has its front at
/// the domain edge.
pub fn front_position_of<T: Real>(values: &[T], dx: T, threshold: T) -> Result<T, FrontError> {
    let i = values
        .iter()
        .rposition(|&v| v >= threshold)
        .ok_or(FrontError::NoFront {
            threshold: threshold.to_f64_lossy(),
        })?;
    let x = T::from_usize_lossy(i) * dx;
    if i + 1 == values.len() {
        return Ok(x);
    }
    let (a, b) = (values[i], values[i + 1]);
    Ok(x + dx * (a - threshold) / (a - b))
}

/// Front of channel 0.
pub fn front_position<T: Real>(field: &WaveField<T>, threshold: T) -> Result<T, FrontError> {
    front_position_of(&field.values[0], field.dx, threshold)
}

/// Front positions over time; `None` where the threshold was not reached.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrontSeries<T> {
    pub times: Vec<T>,
    pub positions: Vec<Option<T>>,
}

impl<T: Real> FrontSeries<T> {
    pub fn push(&mut self, time: T, position: Option<T>) {
        self.times.push(time);
        self.positions.push(position);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedFit<T> {
    pub speed: T,
    pub std_error: T,
    pub intercept: T,
    pub points: usize,
    pub window: (T, T),
}

/// Least-squares slope of front position against time over `window`
/// (default: the second half of the run).
pub fn front_speed<T: Real>(
    trajectory: &Trajectory<T>,
    window: Option<(T, T)>,
) -> Result<SpeedFit<T>, FrontError> {
    fit_series(&trajectory.fronts, window)
}

pub(crate) fn fit_series<T: Real>(series: &FrontSeries<T>, window: Option<(T, T)>) -> Result<SpeedFit<T>, FrontError> {
    let (first, last) = match (series.times.first(), series.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(FrontError::InsufficientPoints(0)),
    };
    let (lo, hi) = window.unwrap_or((first + (last - first) * T::lit(0.5), last));
    let mut pts = Vec::new();
    for (&t, &x) in series.times.iter().zip(&series.positions) {
        if t < lo || t > hi {
            continue;
        }
        match x {
            Some(x) => pts.push((t, x)),
            None => return Err(FrontError::NoFront { threshold: f64::NAN }),
        }
    }
    if pts.len() < 10 {
        return Err(FrontError::InsufficientPoints(pts.len()));
    }
    let n = T::from_usize_lossy(pts.len());
    let mt = pts.iter().map(|p| p.0).sum::<T>() / n;
    let mx = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mt) * (p.1 - mx)).sum();
    let slope = sxy / sxx;
    let intercept = mx - slope * mt;
    let ssr: T = pts
        .iter()
        .map(|p| {
            let r = p.1 - intercept - slope * p.0;
            r * r
        })
        .sum();
    let std_error = (ssr / (n - T::lit(2.0)) / sxx).sqrt();
    Ok(SpeedFit {
        speed: slope,
        std_error,
        intercept,
        points: pts.len(),
        window: (lo, hi),
    })
}
