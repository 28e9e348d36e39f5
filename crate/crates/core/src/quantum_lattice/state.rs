use num_complex::Complex;
use num_traits::Zero;

use super::generator::{build_indexed_generator, build_standard_hamiltonian, IndexedGenerator};
use super::integrator::integrate;
use super::model::{EntanglementString, LatticeModel};
use super::LatticeError;
use crate::Real;

/// All string components `ψ_s` at one time, stored string-major.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedWaveState<T> {
    n_configs: usize,
    n_atoms: usize,
    amplitudes: Vec<Complex<T>>,
    pub time: T,
}

impl<T: Real> IndexedWaveState<T> {
    pub fn zeros(model: &LatticeModel<T>) -> Self {
        Self {
            n_configs: model.n_configs(),
            n_atoms: model.n_atoms,
            amplitudes: vec![Complex::zero(); model.indexed_dimension()],
            time: T::zero(),
        }
    }

    /// Places an ordinary wave function on the all-zeros string at time 0.
    pub fn from_standard(model: &LatticeModel<T>, psi: &[Complex<T>]) -> Result<Self, LatticeError> {
        if psi.len() != model.n_configs() {
            return Err(LatticeError::ShapeMismatch(format!(
                "expected {} configuration amplitudes, got {}",
                model.n_configs(),
                psi.len()
            )));
        }
        let mut state = Self::zeros(model);
        state.amplitudes[..psi.len()].copy_from_slice(psi);
        Ok(state)
    }

    pub fn n_configs(&self) -> usize {
        self.n_configs
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_strings(&self) -> usize {
        1 << self.n_atoms
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    pub fn component(&self, s: EntanglementString) -> &[Complex<T>] {
        let nc = self.n_configs;
        &self.amplitudes[s.index() * nc..(s.index() + 1) * nc]
    }

    pub fn component_mut(&mut self, s: EntanglementString) -> &mut [Complex<T>] {
        let nc = self.n_configs;
        &mut self.amplitudes[s.index() * nc..(s.index() + 1) * nc]
    }

    /// `Σ_c |ψ_s(c)|²` for every string.
    pub fn component_weights(&self) -> Vec<T> {
        self.amplitudes
            .chunks(self.n_configs)
            .map(|chunk| chunk.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Strings whose component has an amplitude above `threshold` in modulus.
    pub fn support(&self, threshold: T) -> Vec<EntanglementString> {
        self.amplitudes
            .chunks(self.n_configs)
            .enumerate()
            .filter(|(_, chunk)| chunk.iter().any(|z| z.norm() > threshold))
            .map(|(s, _)| EntanglementString(s as u32))
            .collect()
    }

    fn check_generator(&self, generator: &IndexedGenerator<T>) -> Result<(), LatticeError> {
        if generator.n_configs() != self.n_configs || generator.n_atoms() != self.n_atoms {
            return Err(LatticeError::ShapeMismatch(format!(
                "state has {} atoms over {} configurations, generator {} over {}",
                self.n_atoms,
                self.n_configs,
                generator.n_atoms(),
                generator.n_configs()
            )));
        }
        Ok(())
    }
}

/// `ψ″ = Σ_s ψ_s`.
pub fn string_sum<T: Real>(state: &IndexedWaveState<T>) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); state.n_configs];
    for chunk in state.amplitudes.chunks(state.n_configs) {
        for (o, z) in out.iter_mut().zip(chunk) {
            *o = *o + *z;
        }
    }
    out
}

/// Advances `state` from `state.time` to `t_final` under `H′`.
pub fn evolve_indexed<T: Real>(
    state: &IndexedWaveState<T>,
    generator: &IndexedGenerator<T>,
    t_final: T,
    tol: T,
) -> Result<IndexedWaveState<T>, LatticeError> {
    state.check_generator(generator)?;
    if t_final < state.time {
        return Err(LatticeError::ShapeMismatch(format!(
            "cannot evolve backwards from t = {} to t = {}",
            state.time, t_final
        )));
    }
    let mut next = state.clone();
    integrate(&mut next.amplitudes, state.time, t_final, tol, |x, y| {
        generator.rhs(x, y)
    })?;
    next.time = t_final;
    Ok(next)
}

/// Evolves an ordinary wave function from time 0 to `t_final` under `H`.
pub fn evolve_standard<T: Real>(
    psi0: &[Complex<T>],
    model: &LatticeModel<T>,
    t_final: T,
    tol: T,
) -> Result<Vec<Complex<T>>, LatticeError> {
    let h = build_standard_hamiltonian(model)?;
    if psi0.len() != h.dim() {
        return Err(LatticeError::ShapeMismatch(format!(
            "expected {} configuration amplitudes, got {}",
            h.dim(),
            psi0.len()
        )));
    }
    let mut psi = psi0.to_vec();
    integrate(&mut psi, T::zero(), t_final, tol, |x, y| {
        h.apply(x, y);
        for z in y.iter_mut() {
            *z = Complex::new(z.im, -z.re);
        }
    })?;
    Ok(psi)
}

/// Normalized Gaussian wave packet on a ring, centred on `center` with
/// width `sigma` sites and quasi-momentum `k`.
pub fn wave_packet<T: Real>(n_sites: usize, center: T, sigma: T, k: T) -> Vec<Complex<T>> {
    let l = T::from_usize_lossy(n_sites);
    let half = l / T::lit(2.0);
    let raw: Vec<Complex<T>> = (0..n_sites)
        .map(|x| {
            let mut d = T::from_usize_lossy(x) - center;
            // shortest signed distance on the ring
            while d > half {
                d = d - l;
            }
            while d < -half {
                d = d + l;
            }
            let amp = (-(d * d) / (T::lit(4.0) * sigma * sigma)).exp();
            Complex::from_polar(amp, k * d)
        })
        .collect();
    normalized(raw)
}

fn normalized<T: Real>(mut v: Vec<Complex<T>>) -> Vec<Complex<T>> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if norm > T::zero() {
        for z in &mut v {
            *z = *z / norm;
        }
    }
    v
}

fn for_each_permutation(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        for_each_permutation(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Normalized product wave function `φ_A(y) Π_a φ_a(x_a)` over configurations.
///
/// When the model asks for Bose symmetrization, the atomic factor is summed
/// over all permutations of the atom labels before normalizing.
pub fn product_state<T: Real>(
    model: &LatticeModel<T>,
    particle: &[Complex<T>],
    atoms: &[Vec<Complex<T>>],
) -> Result<Vec<Complex<T>>, LatticeError> {
    model.validate()?;
    let l = model.n_sites;
    if particle.len() != l || atoms.len() != model.n_atoms || atoms.iter().any(|a| a.len() != l) {
        return Err(LatticeError::ShapeMismatch(format!(
            "need one particle and {} atom wave functions over {} sites",
            model.n_atoms, l
        )));
    }
    let nc = model.n_configs();
    let mut psi = vec![Complex::zero(); nc];
    let mut labels: Vec<usize> = (0..model.n_atoms).collect();
    let mut add = |perm: &[usize]| {
        for (c, out) in psi.iter_mut().enumerate() {
            let mut amp = particle[model.site_of(c, 0)];
            for (slot, &label) in perm.iter().enumerate() {
                amp = amp * atoms[label][model.site_of(c, slot + 1)];
            }
            *out = *out + amp;
        }
    };
    if model.symmetrize {
        for_each_permutation(&mut labels, 0, &mut add);
    } else {
        add(&labels);
    }
    let psi = normalized(psi);
    if psi.iter().all(|z| z.is_zero()) {
        return Err(LatticeError::ShapeMismatch(
            "symmetrized product state vanishes".into(),
        ));
    }
    Ok(psi)
}

/// Largest change of any component under exchanging two atoms that carry the
/// same index in that component's string.
pub fn bose_symmetry_defect<T: Real>(model: &LatticeModel<T>, state: &IndexedWaveState<T>) -> T {
    let n = model.n_atoms;
    let mut worst = T::zero();
    for s in 0..state.n_strings() {
        let string = EntanglementString(s as u32);
        let comp = state.component(string);
        for a in 0..n {
            for b in a + 1..n {
                if string.bit(a) != string.bit(b) {
                    continue;
                }
                for (c, z) in comp.iter().enumerate() {
                    let (xa, xb) = (model.site_of(c, a + 1), model.site_of(c, b + 1));
                    let swapped = model.shifted(
                        model.shifted(c, a + 1, xb as isize - xa as isize),
                        b + 1,
                        xa as isize - xb as isize,
                    );
                    worst = worst.max((*z - comp[swapped]).norm());
                }
            }
        }
    }
    worst
}

/// A measured system with internal channels `j`, each branch evolving with
/// its own couplings; atoms touched by branch `j` carry that branch's index.
#[derive(Clone, Debug)]
pub struct ChannelResolvedState<T> {
    pub amplitudes: Vec<Complex<T>>,
    pub models: Vec<LatticeModel<T>>,
    pub branches: Vec<IndexedWaveState<T>>,
    generators: Vec<IndexedGenerator<T>>,
}

impl<T: Real> ChannelResolvedState<T> {
    pub fn new(
        models: Vec<LatticeModel<T>>,
        amplitudes: Vec<Complex<T>>,
        psi0: &[Complex<T>],
    ) -> Result<Self, LatticeError> {
        if models.len() != amplitudes.len() || models.len() < 2 {
            return Err(LatticeError::InvalidModel(format!(
                "need matching channel models and amplitudes (at least 2), got {} and {}",
                models.len(),
                amplitudes.len()
            )));
        }
        let (first, rest) = models.split_first().expect("nonempty");
        if rest
            .iter()
            .any(|m| m.n_sites != first.n_sites || m.n_atoms != first.n_atoms)
        {
            return Err(LatticeError::InvalidModel(
                "channel models must share the lattice and atom count".into(),
            ));
        }
        let total: T = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (total - T::one()).abs() > T::lit(1e-12) {
            return Err(LatticeError::InvalidModel(format!(
                "channel weights sum to {total}, not 1"
            )));
        }
        let generators = models
            .iter()
            .map(build_indexed_generator)
            .collect::<Result<Vec<_>, _>>()?;
        let branches = models
            .iter()
            .map(|m| IndexedWaveState::from_standard(m, psi0))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            amplitudes,
            models,
            branches,
            generators,
        })
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn evolve(&self, t_final: T, tol: T) -> Result<Self, LatticeError> {
        let branches = self
            .branches
            .iter()
            .zip(&self.generators)
            .map(|(b, g)| evolve_indexed(b, g, t_final, tol))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            branches,
            ..self.clone()
        })
    }
}
