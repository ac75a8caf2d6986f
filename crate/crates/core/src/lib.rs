// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Three-level Dicke quantum battery: `N` three-level atoms (the battery)
//! charged by a single cavity mode (the charger).
//!
//! The crate builds the Hamiltonian in the symmetric occupation basis,
//! propagates the joint pure state, and evaluates battery and charger
//! observables: stored energy, ergotropy, entanglement entropy, ground-state
//! phase, Wigner function and photon statistics. [`runner`] wires these into
//! reproducible experiments writing CSV/JSON output.

pub mod dynamics;
pub mod error;
pub mod groundstate;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod phasespace;
pub mod runner;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub use dynamics::{Method, SpectralPropagator, KrylovPropagator, StateTrajectory, TimeGrid};
pub use error::{Error, Result};
pub use groundstate::{CouplingRange, Phase, PhasePoint};
pub use hilbert::{AtomBasis, AtomConfig, BasisTag, CavityBasis, DensityMatrix, JointState, Operator, Subsystem};
pub use linalg::CsrMatrix;
pub use model::{ChargerKind, Hamiltonians, ModelParams};
pub use observables::{Ergotropy, ObservableRecord, TrajectorySummary};
pub use phasespace::{PhaseGrid, PhotonDistribution, WignerMap};
pub use runner::{ExperimentConfig, Mode, RunReport};
