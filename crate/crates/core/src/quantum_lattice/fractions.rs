use super::model::{EntanglementString, LatticeModel};
use super::state::{ChannelResolvedState, IndexedWaveState};
use super::LatticeError;
use crate::Real;

/// Assignment of lattice sites to cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellPartition {
    cells: Vec<Vec<usize>>,
    site_cell: Vec<usize>,
}

impl CellPartition {
    pub fn new(n_sites: usize, cells: Vec<Vec<usize>>) -> Result<Self, LatticeError> {
        let mut site_cell = vec![usize::MAX; n_sites];
        for (id, cell) in cells.iter().enumerate() {
            for &site in cell {
                if site >= n_sites {
                    return Err(LatticeError::InvalidPartition(format!(
                        "site {site} outside a lattice of {n_sites} sites"
                    )));
                }
                if site_cell[site] != usize::MAX {
                    return Err(LatticeError::InvalidPartition(format!(
                        "site {site} belongs to cells {} and {id}",
                        site_cell[site]
                    )));
                }
                site_cell[site] = id;
            }
        }
        if let Some(site) = site_cell.iter().position(|&c| c == usize::MAX) {
            return Err(LatticeError::InvalidPartition(format!(
                "site {site} belongs to no cell"
            )));
        }
        Ok(Self { cells, site_cell })
    }

    /// `n_cells` runs of consecutive sites, as equal as possible.
    pub fn contiguous(n_sites: usize, n_cells: usize) -> Result<Self, LatticeError> {
        if n_cells == 0 || n_cells > n_sites {
            return Err(LatticeError::InvalidPartition(format!(
                "cannot split {n_sites} sites into {n_cells} cells"
            )));
        }
        let cells = (0..n_cells)
            .map(|k| (k * n_sites / n_cells..(k + 1) * n_sites / n_cells).collect())
            .collect();
        Self::new(n_sites, cells)
    }

    pub fn whole(n_sites: usize) -> Self {
        Self::new(n_sites, vec![(0..n_sites).collect()]).expect("one cell covers all sites")
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_of(&self, site: usize) -> usize {
        self.site_cell[site]
    }

    pub fn sites(&self, cell: usize) -> &[usize] {
        &self.cells[cell]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellFractions<T> {
    pub cell_id: usize,
    /// Expected number of index-1 atoms in the cell.
    pub n1: T,
    /// Expected number of index-0 atoms in the cell.
    pub n0: T,
    /// `None` when no atom weight falls in the cell.
    pub f1: Option<T>,
    pub f0: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FractionReport<T> {
    pub cells: Vec<CellFractions<T>>,
    /// `Σ_cells ⟨N₁⟩`, between 0 and `n_atoms`.
    pub global_n1: T,
    pub global_f1: T,
    /// `‖ψ″‖²`, conserved by the evolution.
    pub string_sum_norm_sq: T,
    /// `Σ_s ‖ψ_s‖²`, which grows once strings other than `s₀` are populated.
    pub family_weight: T,
}

/// Weighted counts `(n1, n0)` per cell with weights `|ψ_s(c)|²`, before
/// normalization.
fn raw_counts<T: Real>(
    model: &LatticeModel<T>,
    state: &IndexedWaveState<T>,
    partition: &CellPartition,
) -> Vec<(T, T)> {
    let mut counts = vec![(T::zero(), T::zero()); partition.n_cells()];
    for s in 0..state.n_strings() {
        let string = EntanglementString(s as u32);
        for (c, z) in state.component(string).iter().enumerate() {
            let w = z.norm_sqr();
            if w == T::zero() {
                continue;
            }
            for a in 0..model.n_atoms {
                let cell = partition.cell_of(model.site_of(c, a + 1));
                if string.bit(a) {
                    counts[cell].0 = counts[cell].0 + w;
                } else {
                    counts[cell].1 = counts[cell].1 + w;
                }
            }
        }
    }
    counts
}

fn check_shape<T: Real>(
    model: &LatticeModel<T>,
    state: &IndexedWaveState<T>,
    partition: &CellPartition,
) -> Result<(), LatticeError> {
    if state.n_configs() != model.n_configs() || state.n_atoms() != model.n_atoms {
        return Err(LatticeError::ShapeMismatch(
            "state was not built for this model".into(),
        ));
    }
    if partition.site_cell.len() != model.n_sites {
        return Err(LatticeError::InvalidPartition(format!(
            "partition covers {} sites, model has {}",
            partition.site_cell.len(),
            model.n_sites
        )));
    }
    Ok(())
}

/// Local entanglement fractions per cell.
///
/// Each configuration of each component contributes its atoms with weight
/// `|ψ_s(c)|²`; expected counts are scaled so that they add up to `n_atoms`.
pub fn entanglement_fractions<T: Real>(
    model: &LatticeModel<T>,
    state: &IndexedWaveState<T>,
    partition: &CellPartition,
) -> Result<FractionReport<T>, LatticeError> {
    check_shape(model, state, partition)?;
    let family_weight: T = state.component_weights().into_iter().sum();
    let sum = super::state::string_sum(state);
    let string_sum_norm_sq: T = sum.iter().map(|z| z.norm_sqr()).sum();
    let raw = raw_counts(model, state, partition);
    let scale = if family_weight > T::zero() {
        T::one() / family_weight
    } else {
        T::zero()
    };
    let mut global_n1 = T::zero();
    let cells = raw
        .into_iter()
        .enumerate()
        .map(|(cell_id, (r1, r0))| {
            let total = r1 + r0;
            let (f1, f0) = if total > T::zero() {
                (Some(r1 / total), Some(r0 / total))
            } else {
                (None, None)
            };
            global_n1 = global_n1 + r1 * scale;
            CellFractions {
                cell_id,
                n1: r1 * scale,
                n0: r0 * scale,
                f1,
                f0,
            }
        })
        .collect();
    Ok(FractionReport {
        cells,
        global_n1,
        global_f1: global_n1 / T::from_usize_lossy(model.n_atoms),
        string_sum_norm_sq,
        family_weight,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelCellFractions<T> {
    pub cell_id: usize,
    /// `f_j` for every channel, `None` where the branch puts no atom weight.
    pub f: Vec<Option<T>>,
    /// `1 − Σ_j p_j f_j`.
    pub f0: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelFractionReport<T> {
    pub probabilities: Vec<T>,
    pub cells: Vec<ChannelCellFractions<T>>,
}

impl<T: Real> ChannelResolvedState<T> {
    pub fn fractions(&self, partition: &CellPartition) -> Result<ChannelFractionReport<T>, LatticeError> {
        let probabilities = self.probabilities();
        let per_branch = self
            .models
            .iter()
            .zip(&self.branches)
            .map(|(m, b)| entanglement_fractions(m, b, partition))
            .collect::<Result<Vec<_>, _>>()?;
        let cells = (0..partition.n_cells())
            .map(|cell_id| {
                let f: Vec<Option<T>> = per_branch.iter().map(|r| r.cells[cell_id].f1).collect();
                let f0 = f
                    .iter()
                    .zip(&probabilities)
                    .try_fold(T::one(), |acc, (fj, &p)| fj.map(|v| acc - p * v));
                ChannelCellFractions { cell_id, f, f0 }
            })
            .collect();
        Ok(ChannelFractionReport {
            probabilities,
            cells,
        })
    }
}
