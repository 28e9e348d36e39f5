use std::fmt;

use super::LatticeError;
use crate::Real;

/// Largest indexed state (in complex amplitudes) a model may request.
pub const DEFAULT_DIMENSION_CAP: usize = 20_000_000;

/// Tight-binding ring holding particle `A` and `n_atoms` atoms.
///
/// Spatial configurations are numbered in base `n_sites`: digit 0 is the site
/// of `A`, digit `a + 1` the site of atom `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeModel<T> {
    pub n_sites: usize,
    pub n_atoms: usize,
    pub hop_atom: T,
    pub hop_particle: T,
    /// Particle–atom contact potential `U`.
    pub u_strength: T,
    /// Atom–atom contact potential `V`.
    pub v_strength: T,
    /// Bose-symmetrize product initial data over atom positions.
    pub symmetrize: bool,
    pub dimension_cap: usize,
}

impl<T: Real> LatticeModel<T> {
    /// Free model with unit hopping and no contact interactions.
    pub fn new(n_sites: usize, n_atoms: usize) -> Self {
        Self {
            n_sites,
            n_atoms,
            hop_atom: T::one(),
            hop_particle: T::one(),
            u_strength: T::zero(),
            v_strength: T::zero(),
            symmetrize: false,
            dimension_cap: DEFAULT_DIMENSION_CAP,
        }
    }

    pub fn with_couplings(mut self, u: T, v: T) -> Self {
        self.u_strength = u;
        self.v_strength = v;
        self
    }

    pub fn with_hopping(mut self, atom: T, particle: T) -> Self {
        self.hop_atom = atom;
        self.hop_particle = particle;
        self
    }

    pub fn with_symmetrize(mut self, symmetrize: bool) -> Self {
        self.symmetrize = symmetrize;
        self
    }

    pub fn with_dimension_cap(mut self, cap: usize) -> Self {
        self.dimension_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        if self.n_sites < 2 {
            return Err(LatticeError::InvalidModel(format!(
                "need at least 2 sites, got {}",
                self.n_sites
            )));
        }
        if self.n_atoms == 0 || self.n_atoms > 31 {
            return Err(LatticeError::InvalidModel(format!(
                "atom count must be in 1..=31, got {}",
                self.n_atoms
            )));
        }
        for (name, value) in [
            ("u_strength", self.u_strength),
            ("v_strength", self.v_strength),
            ("hop_atom", self.hop_atom),
            ("hop_particle", self.hop_particle),
        ] {
            if !value.is_finite() {
                return Err(LatticeError::NonFiniteCoupling(name));
            }
        }
        let dimension = self.indexed_dimension_wide();
        if dimension > self.dimension_cap as u128 {
            return Err(LatticeError::DimensionCap {
                dimension,
                cap: self.dimension_cap,
            });
        }
        Ok(())
    }

    fn indexed_dimension_wide(&self) -> u128 {
        let configs = (self.n_sites as u128).saturating_pow(self.n_atoms as u32 + 1);
        configs.saturating_mul(1u128 << self.n_atoms.min(127))
    }

    /// Number of spatial configurations, `n_sites^(n_atoms + 1)`.
    pub fn n_configs(&self) -> usize {
        self.n_sites.pow(self.n_atoms as u32 + 1)
    }

    pub fn n_strings(&self) -> usize {
        1usize << self.n_atoms
    }

    pub fn indexed_dimension(&self) -> usize {
        self.n_configs() * self.n_strings()
    }

    /// Site of `body` (0 = particle `A`, `a + 1` = atom `a`) in `config`.
    #[inline]
    pub fn site_of(&self, config: usize, body: usize) -> usize {
        (config / self.n_sites.pow(body as u32)) % self.n_sites
    }

    /// Configuration reached by moving `body` by `shift` sites around the ring.
    #[inline]
    pub fn shifted(&self, config: usize, body: usize, shift: isize) -> usize {
        let stride = self.n_sites.pow(body as u32);
        let site = (config / stride) % self.n_sites;
        let l = self.n_sites as isize;
        let moved = ((site as isize + shift) % l + l) % l;
        config - site * stride + moved as usize * stride
    }

    /// Configuration index of explicit body positions.
    pub fn config_index(&self, particle_site: usize, atom_sites: &[usize]) -> usize {
        std::iter::once(particle_site)
            .chain(atom_sites.iter().copied())
            .rev()
            .fold(0, |acc, s| acc * self.n_sites + s)
    }
}

/// Entanglement indices of all atoms; bit `a` set means atom `a` carries index 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntanglementString(pub u32);

impl EntanglementString {
    pub const EMPTY: Self = Self(0);

    pub fn from_bits(bits: &[bool]) -> Self {
        Self(
            bits.iter()
                .enumerate()
                .fold(0, |acc, (a, &b)| acc | (u32::from(b) << a)),
        )
    }

    pub fn all(n_atoms: usize) -> Self {
        Self(((1u64 << n_atoms) - 1) as u32)
    }

    #[inline]
    pub fn bit(self, atom: usize) -> bool {
        self.0 >> atom & 1 == 1
    }

    #[inline]
    pub fn with(self, atom: usize) -> Self {
        Self(self.0 | 1 << atom)
    }

    #[inline]
    pub fn without(self, atom: usize) -> Self {
        Self(self.0 & !(1 << atom))
    }

    pub fn count_entangled(self) -> u32 {
        self.0.count_ones()
    }

    /// Bitwise containment: every index set in `other` is set in `self`.
    #[inline]
    pub fn contains(self, other: Self) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn bits(self, n_atoms: usize) -> Vec<bool> {
        (0..n_atoms).map(|a| self.bit(a)).collect()
    }
}

impl fmt::Debug for EntanglementString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{:b}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_digits_round_trip() {
        let m = LatticeModel::<f64>::new(5, 3);
        let c = m.config_index(4, &[0, 2, 3]);
        assert_eq!(m.site_of(c, 0), 4);
        assert_eq!(m.site_of(c, 1), 0);
        assert_eq!(m.site_of(c, 2), 2);
        assert_eq!(m.site_of(c, 3), 3);
        let moved = m.shifted(c, 1, -1);
        assert_eq!(m.site_of(moved, 1), 4);
        assert_eq!(m.shifted(moved, 1, 1), c);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let m = LatticeModel::<f64>::new(10, 6);
        assert!(matches!(m.validate(), Err(LatticeError::DimensionCap { .. })));
        assert!(LatticeModel::<f64>::new(5, 3).validate().is_ok());
        let tiny = LatticeModel::<f64>::new(5, 3).with_dimension_cap(100);
        assert!(tiny.validate().is_err());
    }

    #[test]
    fn rejects_degenerate_models() {
        assert!(LatticeModel::<f64>::new(1, 1).validate().is_err());
        assert!(LatticeModel::<f64>::new(3, 0).validate().is_err());
        let bad = LatticeModel::new(3, 1).with_couplings(f64::NAN, 0.0);
        assert_eq!(bad.validate(), Err(LatticeError::NonFiniteCoupling("u_strength")));
    }

    #[test]
    fn containment_order() {
        let s = EntanglementString::from_bits(&[true, false, true]);
        assert!(s.contains(EntanglementString::EMPTY));
        assert!(s.contains(EntanglementString(0b001)));
        assert!(!s.contains(EntanglementString(0b010)));
        assert!(EntanglementString::all(3).contains(s));
        assert_eq!(s.with(1), EntanglementString::all(3));
        assert_eq!(s.without(0), EntanglementString(0b100));
    }
}
