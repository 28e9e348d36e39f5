use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{CollapseError, SlipParams};
use crate::front_solver::WaveField;
use crate::Real;

/// A region `β` holding `atoms` atoms, with the local-entanglement
/// probabilities `f_j` sampled at one or more points.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell<T> {
    pub id: usize,
    pub atoms: u64,
    /// `profiles[j][k]` is `f_j` at sample point `k`.
    pub profiles: Vec<Vec<T>>,
    /// Atoms represented by one sample point (`n_a · dx`).
    pub weight: T,
}

impl<T: Real> Cell<T> {
    /// One sample point carrying every atom, so that `n_a ∫ f_j f₀ = N_β f_j f₀`.
    pub fn uniform(id: usize, atoms: u64, f: &[T]) -> Self {
        Cell {
            id,
            atoms,
            profiles: f.iter().map(|&v| vec![v]).collect(),
            weight: T::from_u64(atoms).expect("atom count representable"),
        }
    }

    pub fn n_channels(&self) -> usize {
        self.profiles.len()
    }

    pub fn n_points(&self) -> usize {
        self.profiles.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<(), CollapseError> {
        let bad = |m: String| Err(CollapseError::InvalidParams(format!("cell {}: {m}", self.id)));
        if self.atoms == 0 {
            return bad("needs at least one atom".into());
        }
        if self.profiles.is_empty() || self.n_points() == 0 {
            return bad("empty profile".into());
        }
        if self.profiles.iter().any(|row| row.len() != self.n_points()) {
            return bad("profiles of different lengths".into());
        }
        if self.profiles.iter().flatten().any(|&v| !(v >= T::zero() && v <= T::one())) {
            return bad("f values must lie in [0, 1]".into());
        }
        if !(self.weight.is_finite() && self.weight >= T::zero()) {
            return bad(format!("weight must be non-negative, got {}", self.weight));
        }
        Ok(())
    }

    /// `f₀ = 1 − Σ_j p_j f_j` at sample point `k`.
    pub fn f0_at(&self, p: &[T], k: usize) -> T {
        let s: T = self.profiles.iter().zip(p).map(|(row, &pj)| pj * row[k]).sum();
        (T::one() - s).max(T::zero())
    }

    /// `I_jβ = n_a ∫_β f_j f₀ dx` for every channel.
    pub fn overlaps(&self, p: &[T]) -> Vec<T> {
        let f0: Vec<T> = (0..self.n_points()).map(|k| self.f0_at(p, k)).collect();
        self.profiles
            .iter()
            .map(|row| self.weight * row.iter().zip(&f0).map(|(&f, &g)| f * g).sum::<T>())
            .collect()
    }
}

/// Cuts a front-solver field into cells of `nodes_per_cell` grid points with
/// `atom_density` atoms per unit length.
pub fn cells_from_field<T: Real>(
    field: &WaveField<T>,
    nodes_per_cell: usize,
    atom_density: T,
) -> Result<Vec<Cell<T>>, CollapseError> {
    if nodes_per_cell == 0 {
        return Err(CollapseError::InvalidParams("nodes_per_cell must be positive".into()));
    }
    if !(atom_density.is_finite() && atom_density > T::zero()) {
        return Err(CollapseError::InvalidParams(format!("atom density must be positive, got {atom_density}")));
    }
    let weight = atom_density * field.dx;
    let n = field.n_nodes();
    let cells = (0..n)
        .step_by(nodes_per_cell)
        .enumerate()
        .map(|(id, start)| {
            let end = (start + nodes_per_cell).min(n);
            let atoms = (weight * T::from_usize_lossy(end - start)).round().to_u64().unwrap_or(0).max(1);
            Cell { id, atoms, profiles: field.values.iter().map(|row| row[start..end].to_vec()).collect(), weight }
        })
        .collect();
    Ok(cells)
}

/// Splits `total` into integers proportional to `p`, giving leftover units to
/// the largest fractional parts (lowest index first on ties).
pub fn largest_remainder<T: Real>(p: &[T], total: u64) -> Vec<u64> {
    let t = total as f64;
    let exact: Vec<f64> = p.iter().map(|v| v.to_f64_lossy().max(0.0) * t).collect();
    let mut out: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &k in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        out[k] += 1;
    }
    out
}

/// Poisson mean of slips moving one atom from `source` to `target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlipRate<T> {
    pub source: usize,
    pub target: usize,
    pub mean: T,
}

/// Slip populations of one cell for one step, in a fixed order.
///
/// For every centre `j` with local atoms and every partner `j′` with `p_j′ > 0`
/// there are two populations of mean `W p_j′ p_jβ I_jβ δt/2τ`: the `+`
/// branch moves `j′ → j`, the `−` branch moves `j → j′`.
pub fn slip_rates<T: Real>(cell: &Cell<T>, counts: &[u64], p_global: &[T], params: &SlipParams<T>) -> Vec<SlipRate<T>> {
    let atoms = T::from_u64(cell.atoms).expect("atom count representable");
    let overlaps = cell.overlaps(p_global);
    let half = params.dt / (T::lit(2.0) * params.tau);
    let mut rates = Vec::new();
    for j in 0..counts.len() {
        if counts[j] == 0 || overlaps[j] <= T::zero() {
            continue;
        }
        let local = T::from_u64(counts[j]).expect("count representable") / atoms;
        for jp in 0..counts.len() {
            if jp == j || p_global[jp] <= T::zero() {
                continue;
            }
            let mean = params.w * p_global[jp] * local * overlaps[j] * half;
            rates.push(SlipRate { source: jp, target: j, mean });
            rates.push(SlipRate { source: j, target: jp, mean });
        }
    }
    rates
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub source: usize,
    pub target: usize,
    pub count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CellStep {
    pub slips: u64,
    pub transfers: Vec<Transfer>,
}

fn apply_rates<T: Real, R: Rng + ?Sized>(counts: &mut [u64], rates: &[SlipRate<T>], rng: &mut R) -> CellStep {
    let mut out = CellStep::default();
    for r in rates {
        let m = r.mean.to_f64_lossy();
        if !(m > 0.0) {
            continue;
        }
        let drawn = Poisson::new(m).expect("positive finite mean").sample(rng) as u64;
        let moved = drawn.min(counts[r.source]);
        if moved > 0 {
            counts[r.source] -= moved;
            counts[r.target] += moved;
            out.slips += moved;
            out.transfers.push(Transfer { source: r.source, target: r.target, count: moved });
        }
    }
    out
}

/// Advances one cell by `δt`. Slips from an empty channel are discarded, so
/// counts never go negative and their sum never changes.
pub fn cell_step<T: Real, R: Rng + ?Sized>(
    cell: &Cell<T>,
    counts: &mut [u64],
    p_global: &[T],
    params: &SlipParams<T>,
    rng: &mut R,
) -> CellStep {
    let rates = slip_rates(cell, counts, p_global, params);
    apply_rates(counts, &rates, rng)
}

/// Cells, their integer counts `N_kβ` and the shared rate parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct CellEnsemble<T> {
    pub cells: Vec<Cell<T>>,
    counts: Vec<Vec<u64>>,
    pub params: SlipParams<T>,
}

impl<T: Real> CellEnsemble<T> {
    pub fn new(cells: Vec<Cell<T>>, counts: Vec<Vec<u64>>, params: SlipParams<T>) -> Result<Self, CollapseError> {
        params.validate()?;
        if cells.is_empty() {
            return Err(CollapseError::InvalidParams("at least one cell is required".into()));
        }
        if counts.len() != cells.len() {
            return Err(CollapseError::ShapeMismatch(format!("{} cells but {} count rows", cells.len(), counts.len())));
        }
        let n_channels = cells[0].n_channels();
        for (cell, row) in cells.iter().zip(&counts) {
            cell.validate()?;
            if cell.n_channels() != n_channels || row.len() != n_channels {
                return Err(CollapseError::ShapeMismatch(format!("cell {} disagrees on the channel count", cell.id)));
            }
            let held: u64 = row.iter().sum();
            if held > cell.atoms {
                return Err(CollapseError::InvalidParams(format!(
                    "cell {} holds {held} entangled atoms but has only {}",
                    cell.id, cell.atoms
                )));
            }
        }
        Ok(CellEnsemble { cells, counts, params })
    }

    /// Initial counts `N_kβ` from `p_k N_β` by largest remainders.
    pub fn from_probabilities(cells: Vec<Cell<T>>, p: &[T], params: SlipParams<T>) -> Result<Self, CollapseError> {
        let counts = cells.iter().map(|c| largest_remainder(p, c.atoms)).collect();
        Self::new(cells, counts, params)
    }

    /// Initial counts from `p_k E_β`, where `E_β = N_β · mean(1 − f₀)` is
    /// the entangled share of the cell.
    pub fn from_entangled_fraction(cells: Vec<Cell<T>>, p: &[T], params: SlipParams<T>) -> Result<Self, CollapseError> {
        let counts = cells
            .iter()
            .map(|c| {
                let points = c.n_points().max(1);
                let share: T = (0..c.n_points()).map(|k| T::one() - c.f0_at(p, k)).sum::<T>() / T::from_usize_lossy(points);
                let entangled = (share * T::from_u64(c.atoms).expect("count representable")).round();
                largest_remainder(p, entangled.to_u64().unwrap_or(0).min(c.atoms))
            })
            .collect();
        Self::new(cells, counts, params)
    }

    pub fn n_channels(&self) -> usize {
        self.cells[0].n_channels()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn totals(&self) -> Vec<u64> {
        (0..self.n_channels()).map(|k| self.counts.iter().map(|row| row[k]).sum()).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// `p_j = Σ_β N_jβ / Σ_β Σ_k N_kβ`; all zeros when no atom is entangled.
    pub fn global_probabilities(&self) -> Vec<T> {
        let total = self.total();
        if total == 0 {
            return vec![T::zero(); self.n_channels()];
        }
        let total = T::from_u64(total).expect("count representable");
        self.totals().into_iter().map(|n| T::from_u64(n).expect("count representable") / total).collect()
    }

    /// `p_kβ = N_kβ / N_β`.
    pub fn local_probabilities(&self, cell: usize) -> Vec<T> {
        let atoms = T::from_u64(self.cells[cell].atoms).expect("count representable");
        self.counts[cell].iter().map(|&n| T::from_u64(n).expect("count representable") / atoms).collect()
    }

    /// `C_j = Σ_β I_jβ / N_β²` at the given global probabilities.
    pub fn correlation_coefficients(&self, p: &[T]) -> Vec<T> {
        let mut c = vec![T::zero(); self.n_channels()];
        for cell in &self.cells {
            let n = T::from_u64(cell.atoms).expect("count representable");
            for (cj, i) in c.iter_mut().zip(cell.overlaps(p)) {
                *cj = *cj + i / (n * n);
            }
        }
        c
    }

    /// The channel holding every entangled atom, if there is one.
    pub fn collapsed(&self) -> Option<usize> {
        let totals = self.totals();
        let mut alive = totals.iter().enumerate().filter(|(_, &n)| n > 0);
        match (alive.next(), alive.next()) {
            (Some((k, _)), None) => Some(k),
            _ => None,
        }
    }

    pub fn extinct(&self, channel: usize) -> bool {
        self.totals()[channel] == 0
    }

    /// One step of every cell, cell `β` drawing from `rngs[β]`. Global `p`
    /// is frozen for the duration of the step.
    pub fn step<R: Rng>(&mut self, rngs: &mut [R]) -> Vec<CellStep> {
        assert_eq!(rngs.len(), self.cells.len(), "one random stream per cell");
        let p = self.global_probabilities();
        self.cells
            .iter()
            .zip(self.counts.iter_mut())
            .zip(rngs.iter_mut())
            .map(|((cell, counts), rng)| cell_step(cell, counts, &p, &self.params, rng))
            .collect()
    }
}

/// `steps` independent single steps of cell `cell` from the ensemble's current
/// state, returned as changes `δp_jβ = δN_jβ / N_β`.
pub fn sample_single_steps<T: Real, R: Rng + ?Sized>(
    ensemble: &CellEnsemble<T>,
    cell: usize,
    steps: usize,
    rng: &mut R,
) -> Vec<Vec<T>> {
    let p = ensemble.global_probabilities();
    let c = &ensemble.cells[cell];
    let start = &ensemble.counts()[cell];
    let rates = slip_rates(c, start, &p, &ensemble.params);
    let atoms = T::from_u64(c.atoms).expect("count representable");
    let mut counts = start.clone();
    (0..steps)
        .map(|_| {
            counts.copy_from_slice(start);
            apply_rates(&mut counts, &rates, rng);
            counts
                .iter()
                .zip(start)
                .map(|(&a, &b)| (T::from_i64(a as i64 - b as i64).expect("count representable")) / atoms)
                .collect()
        })
        .collect()
}
