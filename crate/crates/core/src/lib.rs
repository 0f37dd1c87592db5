//! Exact simulation of spin-1/2 atoms in a one-dimensional optical lattice.
//!
//! Two overlapping lattices trap the internal states `|0⟩` and `|1⟩`; shifting
//! one relative to the other produces a conditional collision phase on the
//! `|1⟩_k|0⟩_l` component. Combined with global resonant pulses this realizes
//! Ising, anisotropic Heisenberg and squeezing Hamiltonians. This crate holds
//! the register, the lattice geometry, the compiler from Hamiltonians to gate
//! schedules, the schedule runner with a dense brute-force oracle, and the
//! collective-spin observables.

pub mod dense;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod lattice;
pub mod observables;
pub mod schedule;
pub mod spin;
pub mod state;

pub use error::{Error, Result};
pub use evolution::{run_schedule, EvolutionTrace, Probe, Snapshot};
pub use hamiltonian::{CouplingKind, HamiltonianSpec, PairCoupling};
pub use lattice::{Boundary, LatticeConfig, OccupancyMask};
pub use observables::{MomentSet, SqueezingReport};
pub use schedule::{Basis, ErrorOrder, Layer, Schedule};
pub use state::{Axis, PhaseGate, StateVector};
