//! Exact lattice dynamics with entanglement indices.
//!
//! A particle `A` and `N` atoms hop on a periodic ring of sites. Every atom
//! carries an index `r ∈ {0, 1}` recording whether it has been influenced by
//! `A` (directly or through a chain of collisions), so the wave function
//! splits into `2^N` components `ψ_s`, one per [`EntanglementString`].
//!
//! The particle–atom contact term acts on an atom's index as `S + P₁`, and the
//! atom–atom contact term as `P₀⊗P₀ + P₁⊗P₁ + P₁⊗S + S⊗P₁`, where `P₀`, `P₁`
//! project on indices 0 and 1 and `S` raises 0 to 1. Nothing lowers an index,
//! so the resulting generator is not self-adjoint, while the sum of all
//! components still obeys the ordinary Schrödinger equation.

mod fractions;
mod generator;
pub mod integrator;
mod model;
mod sparse;
mod state;

use thiserror::Error;

pub use fractions::{
    entanglement_fractions, CellFractions, CellPartition, ChannelCellFractions,
    ChannelFractionReport, FractionReport,
};
pub use generator::{
    adjoint_gap, build_indexed_generator, build_standard_hamiltonian, check_directed_flow,
    non_self_adjointness_witness, AdjointWitness, CouplingFlags, FlowReport, IndexedGenerator,
};
pub use model::{EntanglementString, LatticeModel, DEFAULT_DIMENSION_CAP};
pub use sparse::SparseOperator;
pub use state::{
    bose_symmetry_defect, evolve_indexed, evolve_standard, product_state, string_sum, wave_packet,
    ChannelResolvedState, IndexedWaveState,
};

/// Integrator tolerance used when none is configured.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("indexed dimension {dimension} exceeds the cap of {cap} amplitudes")]
    DimensionCap { dimension: u128, cap: usize },
    #[error("coupling `{0}` is not finite")]
    NonFiniteCoupling(&'static str),
    #[error("invalid lattice model: {0}")]
    InvalidModel(String),
    #[error("integrator tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("step size underflow at t = {time} (h = {step})")]
    StepUnderflow { time: f64, step: f64 },
    #[error("non-finite amplitude encountered at t = {time}")]
    NonFiniteAmplitude { time: f64 },
    #[error("state does not match the model: {0}")]
    ShapeMismatch(String),
    #[error("invalid cell partition: {0}")]
    InvalidPartition(String),
}
