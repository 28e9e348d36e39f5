use num_complex::Complex;
use num_traits::Zero;

use super::model::{EntanglementString, LatticeModel};
use super::sparse::SparseOperator;
use super::LatticeError;
use crate::Real;

/// Which terms were assembled into a generator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CouplingFlags {
    pub kinetic: bool,
    pub particle_atom: bool,
    pub atom_atom: bool,
    /// Entries added after assembly through [`IndexedGenerator::with_additional_couplings`].
    pub injected: bool,
}

/// The index-extended evolution operator `H′` acting on all string components.
///
/// Amplitude `(s, c)` sits at flat position `s * n_configs + c`.
#[derive(Clone, Debug)]
pub struct IndexedGenerator<T> {
    op: SparseOperator<T>,
    n_configs: usize,
    n_atoms: usize,
    pub flags: CouplingFlags,
}

impl<T: Real> IndexedGenerator<T> {
    pub fn operator(&self) -> &SparseOperator<T> {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
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

    /// Block mapping the `source` component into the `target` component, as
    /// an operator on spatial configurations.
    pub fn block(&self, target: EntanglementString, source: EntanglementString) -> SparseOperator<T> {
        let nc = self.n_configs;
        let (t0, s0) = (target.index() * nc, source.index() * nc);
        let triplets = self
            .op
            .entries()
            .filter(|&(r, c, _)| r / nc == target.index() && c / nc == source.index())
            .map(|(r, c, v)| (r - t0, c - s0, v))
            .collect();
        SparseOperator::from_triplets(nc, triplets)
    }

    /// Returns a copy with extra flat-index entries added to the operator.
    pub fn with_additional_couplings(&self, extra: Vec<(usize, usize, Complex<T>)>) -> Self {
        let mut triplets = self.op.to_triplets();
        triplets.extend(extra);
        Self {
            op: SparseOperator::from_triplets(self.op.dim(), triplets),
            n_configs: self.n_configs,
            n_atoms: self.n_atoms,
            flags: CouplingFlags {
                injected: true,
                ..self.flags
            },
        }
    }

    /// `out = -i H′ x`.
    pub fn rhs(&self, x: &[Complex<T>], out: &mut [Complex<T>]) {
        self.op.apply(x, out);
        for z in out.iter_mut() {
            *z = Complex::new(z.im, -z.re);
        }
    }
}

fn kinetic_triplets<T: Real>(
    model: &LatticeModel<T>,
    offset: usize,
    triplets: &mut Vec<(usize, usize, Complex<T>)>,
) {
    let nc = model.n_configs();
    for c in 0..nc {
        for body in 0..=model.n_atoms {
            let hop = if body == 0 { model.hop_particle } else { model.hop_atom };
            if hop == T::zero() {
                continue;
            }
            for shift in [-1isize, 1] {
                let to = model.shifted(c, body, shift);
                triplets.push((offset + to, offset + c, Complex::new(-hop, T::zero())));
            }
        }
    }
}

/// Assembles `H′` for `model`.
pub fn build_indexed_generator<T: Real>(
    model: &LatticeModel<T>,
) -> Result<IndexedGenerator<T>, LatticeError> {
    model.validate()?;
    let nc = model.n_configs();
    let n = model.n_atoms;
    let u = Complex::new(model.u_strength, T::zero());
    let v = Complex::new(model.v_strength, T::zero());
    let mut triplets = Vec::new();
    for s in 0..1usize << n {
        let string = EntanglementString(s as u32);
        let offset = s * nc;
        kinetic_triplets(model, offset, &mut triplets);
        for c in 0..nc {
            let row = offset + c;
            let y = model.site_of(c, 0);
            if !u.is_zero() {
                for a in 0..n {
                    if model.site_of(c, a + 1) != y || !string.bit(a) {
                        continue;
                    }
                    // P1 keeps index 1, S raises it from 0
                    triplets.push((row, row, u));
                    triplets.push((row, string.without(a).index() * nc + c, u));
                }
            }
            if !v.is_zero() {
                for a in 0..n {
                    for b in a + 1..n {
                        if model.site_of(c, a + 1) != model.site_of(c, b + 1) {
                            continue;
                        }
                        match (string.bit(a), string.bit(b)) {
                            (false, false) => triplets.push((row, row, v)),
                            (true, true) => {
                                triplets.push((row, row, v));
                                triplets.push((row, string.without(b).index() * nc + c, v));
                                triplets.push((row, string.without(a).index() * nc + c, v));
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    Ok(IndexedGenerator {
        op: SparseOperator::from_triplets(nc << n, triplets),
        n_configs: nc,
        n_atoms: n,
        flags: CouplingFlags {
            kinetic: model.hop_atom != T::zero() || model.hop_particle != T::zero(),
            particle_atom: !u.is_zero(),
            atom_atom: !v.is_zero(),
            injected: false,
        },
    })
}

/// The ordinary Hamiltonian `H = T + U Σ_a δ(y, x_a) + V Σ_{a<b} δ(x_a, x_b)`
/// on spatial configurations.
pub fn build_standard_hamiltonian<T: Real>(
    model: &LatticeModel<T>,
) -> Result<SparseOperator<T>, LatticeError> {
    model.validate()?;
    let nc = model.n_configs();
    let mut triplets = Vec::new();
    kinetic_triplets(model, 0, &mut triplets);
    for c in 0..nc {
        let y = model.site_of(c, 0);
        let sites: Vec<usize> = (1..=model.n_atoms).map(|b| model.site_of(c, b)).collect();
        let mut diag = T::zero();
        for (a, &xa) in sites.iter().enumerate() {
            if xa == y {
                diag = diag + model.u_strength;
            }
            for &xb in &sites[a + 1..] {
                if xa == xb {
                    diag = diag + model.v_strength;
                }
            }
        }
        triplets.push((c, c, Complex::new(diag, T::zero())));
    }
    Ok(SparseOperator::from_triplets(nc, triplets))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowReport {
    pub directed: bool,
    /// Distinct `(target, source)` string pairs with a nonzero off-diagonal block.
    pub inter_string_blocks: Vec<(EntanglementString, EntanglementString)>,
    /// The subset of those pairs where `target` does not contain `source`.
    pub violations: Vec<(EntanglementString, EntanglementString)>,
}

/// Checks that every block between distinct strings only raises indices.
pub fn check_directed_flow<T: Real>(generator: &IndexedGenerator<T>) -> FlowReport {
    let nc = generator.n_configs;
    let mut blocks: Vec<(EntanglementString, EntanglementString)> = generator
        .op
        .entries()
        .map(|(r, c, _)| (r / nc, c / nc))
        .filter(|(t, s)| t != s)
        .map(|(t, s)| (EntanglementString(t as u32), EntanglementString(s as u32)))
        .collect();
    blocks.sort_unstable();
    blocks.dedup();
    let violations: Vec<_> = blocks.iter().copied().filter(|(t, s)| !t.contains(*s)).collect();
    FlowReport {
        directed: violations.is_empty(),
        inter_string_blocks: blocks,
        violations,
    }
}

/// Basis pair `(φ, ψ) = (e_row, e_col)` for which `⟨φ|H′ψ⟩ ≠ conj⟨ψ|H′φ⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdjointWitness<T> {
    pub row: usize,
    pub col: usize,
    /// `⟨φ|H′ψ⟩`.
    pub forward: Complex<T>,
    /// `conj⟨ψ|H′φ⟩`.
    pub backward: Complex<T>,
    pub gap: T,
}

/// Largest violation of self-adjointness over basis vector pairs, if any
/// exceeds `threshold`.
pub fn non_self_adjointness_witness<T: Real>(
    generator: &IndexedGenerator<T>,
    threshold: T,
) -> Option<AdjointWitness<T>> {
    let mut best: Option<AdjointWitness<T>> = None;
    for (r, c, v) in generator.op.entries() {
        let backward = generator.op.get(c, r).conj();
        let gap = (v - backward).norm();
        if gap > threshold && best.map_or(true, |b| gap > b.gap) {
            best = Some(AdjointWitness {
                row: r,
                col: c,
                forward: v,
                backward,
                gap,
            });
        }
    }
    best
}

/// `|⟨φ|H′ψ⟩ − conj⟨ψ|H′φ⟩|` for arbitrary vectors.
pub fn adjoint_gap<T: Real>(
    generator: &IndexedGenerator<T>,
    phi: &[Complex<T>],
    psi: &[Complex<T>],
) -> T {
    let dim = generator.dim();
    let mut h_psi = vec![Complex::zero(); dim];
    let mut h_phi = vec![Complex::zero(); dim];
    generator.op.apply(psi, &mut h_psi);
    generator.op.apply(phi, &mut h_phi);
    let dot = |a: &[Complex<T>], b: &[Complex<T>]| {
        a.iter()
            .zip(b)
            .fold(Complex::<T>::zero(), |acc, (x, y)| acc + x.conj() * y)
    };
    (dot(phi, &h_psi) - dot(psi, &h_phi).conj()).norm()
}
