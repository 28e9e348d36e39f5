//! Adaptive Dormand–Prince 5(4) stepping for autonomous complex systems.
//!
//! The local error estimate comes from the embedded fourth-order solution and
//! is controlled per unit time: a step of length `h` is accepted when
//! `max |err| <= tol * h`.

use num_complex::Complex;
use num_traits::Zero;

use super::LatticeError;
use crate::Real;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Integrates `dy/dt = rhs(y)` from `t0` to `t1` in place.
pub fn integrate<T, F>(
    y: &mut [Complex<T>],
    t0: T,
    t1: T,
    tol: T,
    mut rhs: F,
) -> Result<StepStats, LatticeError>
where
    T: Real,
    F: FnMut(&[Complex<T>], &mut [Complex<T>]),
{
    if !(tol > T::zero()) || !tol.is_finite() {
        return Err(LatticeError::InvalidTolerance(tol.to_f64_lossy()));
    }
    let mut stats = StepStats::default();
    let span = t1 - t0;
    if span <= T::zero() {
        return Ok(stats);
    }
    let n = y.len();
    let zero = Complex::<T>::zero();
    let mut k: Vec<Vec<Complex<T>>> = (0..7).map(|_| vec![zero; n]).collect();
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];

    rhs(y, &mut k[0]);
    stats.rhs_evals += 1;

    let sup = |v: &[Complex<T>]| v.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let rate = sup(&k[0]) / sup(y).max(T::lit(1e-300));
    let mut h = span.min(T::lit(0.1) / (rate + T::one()));
    let mut t = t0;
    let min_step = T::epsilon() * T::lit(64.0) * t1.abs().max(T::one());

    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        for s in 1..7 {
            stage.copy_from_slice(y);
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a == 0.0 {
                    continue;
                }
                let coef = h * T::lit(a);
                for (st, kv) in stage.iter_mut().zip(kj) {
                    *st = *st + *kv * coef;
                }
            }
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
            rhs(&stage, &mut k[s]);
            stats.rhs_evals += 1;
        }

        let mut err = T::zero();
        for i in 0..n {
            let mut e = Complex::<T>::zero();
            for (s, ks) in k.iter().enumerate() {
                if E[s] != 0.0 {
                    e = e + ks[i] * T::lit(E[s]);
                }
            }
            err = err.max((e * h).norm());
        }
        if !err.is_finite() || y_new.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            if h <= min_step {
                return Err(LatticeError::NonFiniteAmplitude { time: t.to_f64_lossy() });
            }
            h = h * T::lit(0.2);
            stats.rejected += 1;
            continue;
        }
        let allowed = tol * h;
        let ratio = if err > T::zero() { err / allowed } else { T::zero() };
        if ratio <= T::one() {
            t = if h == t1 - t { t1 } else { t + h };
            y.copy_from_slice(&y_new);
            // first-same-as-last: the seventh stage is f(y_new)
            let last = k.pop().expect("seven stages");
            k.insert(0, last);
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if ratio > T::zero() {
            T::lit(0.9) * ratio.powf(T::lit(-0.25))
        } else {
            T::lit(5.0)
        };
        h = h * factor.max(T::lit(0.2)).min(T::lit(5.0));
        if h < min_step && t < t1 {
            return Err(LatticeError::StepUnderflow {
                time: t.to_f64_lossy(),
                step: h.to_f64_lossy(),
            });
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotates_a_two_level_system() {
        // dy/dt = -i w y has the exact solution y0 * exp(-i w t)
        let w = 3.0_f64;
        let mut y = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.5)];
        let stats = integrate(&mut y, 0.0, 2.0, 1e-12, |x, dx| {
            for (d, v) in dx.iter_mut().zip(x) {
                *d = Complex::new(0.0, -w) * v;
            }
        })
        .unwrap();
        let phase = Complex::new(0.0, -w * 2.0).exp();
        assert!((y[0] - phase).norm() < 1e-10);
        assert!((y[1] - Complex::new(0.0, 0.5) * phase).norm() < 1e-10);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn zero_span_is_identity() {
        let mut y = vec![Complex::new(0.3_f64, -0.1)];
        let stats = integrate(&mut y, 1.0, 1.0, 1e-9, |_, _| panic!("not called")).unwrap();
        assert_eq!(stats.rhs_evals, 0);
        assert_eq!(y[0], Complex::new(0.3, -0.1));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let mut y = vec![Complex::new(1.0_f64, 0.0)];
        assert!(integrate(&mut y, 0.0, 1.0, 0.0, |_, _| {}).is_err());
    }
}
