//! Simulation kernels for a collapse mechanism built from local entanglement.
//!
//! Four computational subsystems live here:
//!
//! * [`quantum_lattice`]: exact lattice dynamics of wave-function components
//!   indexed by entanglement strings, together with the ordinary Schrödinger
//!   evolution they must reproduce when summed.
//! * [`front_solver`]: the nonlinear diffusion (Fisher-KPP type) equation for
//!   the probability of local entanglement, with front tracking.
//! * [`incoherence`]: Wigner random matrices, signed spectral splitting and
//!   environment rate formulas.
//! * [`collapse_engine`]: integer slip Monte Carlo over cells, covariance
//!   diagnostics, a two-channel Fokker-Planck solver and Born-rule statistics.
//!
//! Numerical code is generic over the scalar type through [`Real`]; the
//! `*64` aliases below fix it to `f64`, which is what the command-line runner
//! uses.

pub mod collapse_engine;
pub mod front_solver;
pub mod incoherence;
pub mod quantum_lattice;
pub mod rng;
pub mod scalar;

pub use scalar::{ExactZero, Real};

pub type LatticeModel64 = quantum_lattice::LatticeModel<f64>;
pub type IndexedWaveState64 = quantum_lattice::IndexedWaveState<f64>;
pub type IndexedGenerator64 = quantum_lattice::IndexedGenerator<f64>;

pub type FrontConfig64 = front_solver::FrontConfig<f64>;
pub type WaveField64 = front_solver::WaveField<f64>;
pub type Trajectory64 = front_solver::Trajectory<f64>;

pub type HermitianSample64 = incoherence::HermitianSample<f64>;
pub type FluctuationSplit64 = incoherence::FluctuationSplit<f64>;
pub type EnvironmentParams64 = incoherence::EnvironmentParams<f64>;

pub type CellEnsemble64 = collapse_engine::CellEnsemble<f64>;
pub type CollapseScenario64 = collapse_engine::CollapseScenario<f64>;
pub type CollapseRunResult64 = collapse_engine::CollapseRunResult<f64>;
