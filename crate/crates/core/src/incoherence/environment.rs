use num_traits::Float;

use super::IncoherenceError;
use crate::Real;

/// Gas and box parameters in cgs units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvironmentParams<T> {
    /// Molecular number density, cm⁻³.
    pub n_e: T,
    /// Mean molecular speed, cm/s.
    pub v_e: T,
    /// Box surface, cm².
    pub s_area: T,
    /// Box size, cm.
    pub l: T,
    /// Speed of entanglement waves (sound), cm/s.
    pub c_s: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvironmentRates<T> {
    /// Wall collisions per second, `n_e v_e S`.
    pub collision_rate: T,
    /// Entanglement waves present at once, `n_e v_e S L / c_s`.
    pub n_waves: T,
    /// Typical fluctuation of that number, `√n_waves`.
    pub n_fluct_waves: T,
    /// Crossing time `L / c_s`.
    pub delta_t: T,
}

impl<T: Real> EnvironmentParams<T> {
    pub fn validate(&self) -> Result<(), IncoherenceError> {
        for (name, v) in [
            ("n_e", self.n_e),
            ("v_e", self.v_e),
            ("s_area", self.s_area),
            ("l", self.l),
            ("c_s", self.c_s),
        ] {
            if !(v > T::zero()) {
                return Err(IncoherenceError::NonPositive(name, v.to_f64_lossy()));
            }
        }
        Ok(())
    }
}

pub fn environment_rates<T: Real>(env: &EnvironmentParams<T>) -> Result<EnvironmentRates<T>, IncoherenceError> {
    env.validate()?;
    let collision_rate = env.n_e * env.v_e * env.s_area;
    let delta_t = env.l / env.c_s;
    let n_waves = collision_rate * delta_t;
    Ok(EnvironmentRates {
        collision_rate,
        n_waves,
        n_fluct_waves: Float::sqrt(n_waves),
        delta_t,
    })
}
