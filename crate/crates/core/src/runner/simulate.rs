// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! One charging trajectory: build, propagate, stream observables, watch the
//! photon cutoff and grow it when the run is in automatic mode.

use serde::Serialize;

use crate::dynamics::{self, Method, TimeGrid};
use crate::error::{Error, Result};
use crate::hilbert::{self, DensityMatrix, JointState, Operator, Subsystem};
use crate::model::{self, ModelParams};
use crate::observables::{self, ObservableRecord, RecordEvaluator, SummaryBuilder, TrajectorySummary};

use super::config::MethodChoice;

/// Population allowed in the top Fock levels at any sample.
pub const LEAKAGE_TOL: f64 = 1e-6;
pub const LEAKAGE_LEVELS: usize = 3;
/// Largest block `auto` still diagonalizes densely.
pub const SPECTRAL_BLOCK_LIMIT: usize = 1500;
const MAX_GROWTH_ROUNDS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimOptions {
    pub method: MethodChoice,
    pub krylov_dim: usize,
    pub keep_records: bool,
    pub keep_cavity_at_peak: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { method: MethodChoice::Auto, krylov_dim: 40, keep_records: true, keep_cavity_at_peak: false }
    }
}

/// Per-sample identities, each true when it held at every sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantFlags {
    /// `E_B = ergotropy + E_locked` within 1e-9.
    pub energy_balance: bool,
    /// `0 <= ergotropy <= E_B`.
    pub ergotropy_bounds: bool,
    /// State norm within 1e-8 of one.
    pub norm_conserved: bool,
    /// `<H>` within 1e-8 (relative) of its initial value.
    pub energy_conserved: bool,
    /// `S(rho_A) = S(rho_B)` within 1e-9 at the energy peak.
    pub entropy_symmetric: bool,
    /// `S = 0` at `t = 0`.
    pub initial_entropy_zero: bool,
}

impl InvariantFlags {
    fn new() -> Self {
        Self {
            energy_balance: true,
            ergotropy_bounds: true,
            norm_conserved: true,
            energy_conserved: true,
            entropy_symmetric: true,
            initial_entropy_zero: true,
        }
    }

    pub fn all(&self) -> bool {
        self.energy_balance
            && self.ergotropy_bounds
            && self.norm_conserved
            && self.energy_conserved
            && self.entropy_symmetric
            && self.initial_entropy_zero
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("energy_balance", self.energy_balance),
            ("ergotropy_bounds", self.ergotropy_bounds),
            ("norm_conserved", self.norm_conserved),
            ("energy_conserved", self.energy_conserved),
            ("entropy_symmetric", self.entropy_symmetric),
            ("initial_entropy_zero", self.initial_entropy_zero),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryRun {
    /// Parameters with the cutoff actually used.
    pub params: ModelParams,
    pub n_max: usize,
    pub method: &'static str,
    /// Largest top-level photon population seen.
    pub leakage: f64,
    /// How often the automatic cutoff was enlarged.
    pub cutoff_growths: usize,
    pub records: Vec<ObservableRecord>,
    pub summary: TrajectorySummary,
    pub invariants: InvariantFlags,
    /// `rho_A(t_E)` when requested.
    pub cavity_at_peak: Option<DensityMatrix>,
}

/// Picks the integrator for `h` under `choice`.
pub fn choose_method(choice: MethodChoice, h: &Operator, krylov_dim: usize) -> Method {
    match choice {
        MethodChoice::Spectral => Method::Spectral,
        MethodChoice::Krylov => Method::Krylov { max_dim: krylov_dim },
        MethodChoice::Auto => {
            let largest = h.matrix().connected_components().iter().map(Vec::len).max().unwrap_or(0);
            if largest <= SPECTRAL_BLOCK_LIMIT {
                Method::Spectral
            } else {
                Method::Krylov { max_dim: krylov_dim }
            }
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Spectral => "spectral",
        Method::Krylov { .. } => "krylov",
    }
}

/// Runs one trajectory. With an automatic cutoff a truncation alarm
/// enlarges `n_max` and restarts; with an explicit cutoff it is an error.
pub fn simulate(params: &ModelParams, grid: &TimeGrid, opts: &SimOptions) -> Result<TrajectoryRun> {
    params.validate()?;
    let auto = params.n_max.is_none();
    let mut n_max = params.resolved_n_max();
    let mut growths = 0;
    loop {
        match attempt(params, n_max, grid, opts) {
            Err(Error::Truncation { .. }) if auto && growths < MAX_GROWTH_ROUNDS => {
                n_max += (n_max / 2).max(8);
                growths += 1;
            }
            other => {
                return other.map(|mut run| {
                    run.cutoff_growths = growths;
                    run
                })
            }
        }
    }
}

fn attempt(params: &ModelParams, n_max: usize, grid: &TimeGrid, opts: &SimOptions) -> Result<TrajectoryRun> {
    let p = params.clone().with_n_max(Some(n_max));
    let cavity = p.cavity_basis()?;
    let atoms = p.atom_basis()?;
    let hams = model::build_hamiltonians(&p, &cavity, &atoms)?;
    let psi0 = model::initial_joint_state_in(&p, &cavity, &atoms)?;
    let method = choose_method(opts.method, &hams.h, opts.krylov_dim);
    let evaluator = RecordEvaluator::new(&hams.h_b_atomic)?;
    let e0 = hams.h.expectation(psi0.amplitudes()).re;

    let mut builder = SummaryBuilder::new();
    let mut records = Vec::new();
    let mut flags = InvariantFlags::new();
    let mut leakage = 0.0f64;
    let mut peak: Option<JointState> = None;
    dynamics::evolve(method, &hams.h, &psi0, grid, &mut |i, t, state| {
        let leak = state.top_fock_population(LEAKAGE_LEVELS);
        leakage = leakage.max(leak);
        if leak > LEAKAGE_TOL {
            return Err(Error::Truncation { n_max, leakage: leak });
        }
        let rec = evaluator.record(t, state)?;
        flags.energy_balance &= (rec.stored_energy - rec.ergotropy - rec.locked_energy).abs() <= 1e-9;
        flags.ergotropy_bounds &= rec.ergotropy >= 0.0 && rec.ergotropy <= rec.stored_energy + 1e-12;
        flags.norm_conserved &= (state.norm() - 1.0).abs() <= 1e-8;
        let e = hams.h.expectation(state.amplitudes()).re;
        flags.energy_conserved &= (e - e0).abs() <= 1e-8 * e0.abs().max(1.0);
        if i == 0 {
            flags.initial_entropy_zero = rec.entropy.abs() <= 1e-9;
        }
        builder.push(&rec);
        if builder.energy_peak_index() == Some(i) {
            peak = Some(state.clone());
        }
        if opts.keep_records {
            records.push(rec);
        }
        Ok(())
    })?;
    let summary = builder.finish()?;
    let peak = peak.ok_or(Error::EmptyTrajectory)?;
    let rho_a = hilbert::partial_trace(&peak, Subsystem::Cavity)?;
    flags.entropy_symmetric = (observables::entropy(&rho_a)? - summary.s_at_te).abs() <= 1e-9;
    Ok(TrajectoryRun {
        params: p,
        n_max,
        method: method_name(method),
        leakage,
        cutoff_growths: 0,
        records,
        summary,
        invariants: flags,
        cavity_at_peak: opts.keep_cavity_at_peak.then_some(rho_a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChargerKind;

    #[test]
    fn auto_cutoff_grows_past_the_initial_guess() {
        // the Fock charger starts three levels below the auto cutoff and
        // spreads upward under strong coupling
        let p = ModelParams::default().with_atoms(2).with_charger(ChargerKind::Fock);
        let grid = TimeGrid::new(4.0, 81).unwrap();
        let run = simulate(&p, &grid, &SimOptions::default()).unwrap();
        assert!(run.cutoff_growths > 0);
        assert!(run.leakage <= LEAKAGE_TOL);
        assert!(run.invariants.all(), "{:?}", run.invariants.failures());
        assert_eq!(run.records.len(), 81);

        let fixed = p.clone().with_n_max(Some(p.resolved_n_max()));
        assert!(matches!(simulate(&fixed, &grid, &SimOptions::default()), Err(Error::Truncation { .. })));
    }

    #[test]
    fn uncoupled_battery_never_charges() {
        let p = ModelParams::default().with_atoms(2).with_couplings(0.0, 0.0);
        let run = simulate(&p, &TimeGrid::new(2.0, 21).unwrap(), &SimOptions::default()).unwrap();
        assert!(run.records.iter().all(|r| r.stored_energy.abs() < 1e-14));
        assert_eq!(run.summary.e_max, 0.0);
    }

    #[test]
    fn methods_agree_on_summary() {
        let p = ModelParams::default().with_atoms(2);
        let grid = TimeGrid::new(3.0, 61).unwrap();
        let s = simulate(&p, &grid, &SimOptions { method: MethodChoice::Spectral, ..Default::default() }).unwrap();
        let k = simulate(&p, &grid, &SimOptions { method: MethodChoice::Krylov, ..Default::default() }).unwrap();
        assert_eq!(s.method, "spectral");
        assert_eq!(k.method, "krylov");
        assert!((s.summary.e_max - k.summary.e_max).abs() < 1e-9);
        assert_eq!(s.summary.t_e, k.summary.t_e);
    }
}
