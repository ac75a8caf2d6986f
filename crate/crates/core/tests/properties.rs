// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

use dicke_qb::dynamics::{KrylovPropagator, SpectralPropagator};
use dicke_qb::hilbert::{self, JointState, Subsystem};
use dicke_qb::model::{self, ChargerKind, ModelParams};
use dicke_qb::observables::{self, RecordEvaluator};
use dicke_qb::{linalg, C64};
use proptest::prelude::*;

fn hamiltonians(n: usize, n_max: usize, g12: f64, g23: f64) -> model::Hamiltonians {
    let p = ModelParams::default().with_atoms(n).with_couplings(g12, g23).with_n_max(Some(n_max));
    model::build_hamiltonians(&p, &p.cavity_basis().unwrap(), &p.atom_basis().unwrap()).unwrap()
}

fn random_state(cavity: usize, atoms: usize, raw: &[(f64, f64)]) -> JointState {
    let mut v: Vec<C64> = raw.iter().take(cavity * atoms).map(|&(a, b)| C64::new(a, b)).collect();
    let norm = linalg::norm(&v);
    v.iter_mut().for_each(|z| *z /= norm);
    JointState::new(cavity, atoms, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_hermitian_with_traceless_interaction(
        n in 1usize..5, n_max in 1usize..10, g12 in -2.0f64..2.0, g23 in -2.0f64..2.0,
    ) {
        let h = hamiltonians(n, n_max, g12, g23);
        prop_assert!(h.h.is_hermitian(0.0));
        prop_assert!(h.h_i.matrix().diagonal_values().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn thermodynamic_identities_for_arbitrary_states(
        n in 1usize..4, n_max in 1usize..6,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 70),
    ) {
        let h = hamiltonians(n, n_max, 1.0, 1.0);
        let atoms = h.h_b_atomic.dim();
        prop_assume!((n_max + 1) * atoms <= raw.len());
        let psi = random_state(n_max + 1, atoms, &raw);
        prop_assume!(psi.norm() > 0.0);
        let rec = RecordEvaluator::new(&h.h_b_atomic).unwrap().record(0.5, &psi).unwrap();
        prop_assert!((rec.stored_energy - rec.ergotropy - rec.locked_energy).abs() < 1e-9);
        prop_assert!(rec.ergotropy >= 0.0 && rec.ergotropy <= rec.stored_energy + 1e-12);
        let s_a = observables::entropy(&hilbert::partial_trace(&psi, Subsystem::Cavity).unwrap()).unwrap();
        prop_assert!((s_a - rec.entropy).abs() < 1e-9);
    }

    #[test]
    fn integrators_agree_and_reverse(
        g12 in -1.5f64..1.5, g23 in -1.5f64..1.5, t in -2.0f64..2.0,
    ) {
        let h = hamiltonians(2, 14, g12, g23);
        let p = ModelParams::default().with_atoms(2).with_charger(ChargerKind::Fock).with_n_max(Some(14));
        let psi = model::initial_joint_state_in(&p, &p.cavity_basis().unwrap(), &p.atom_basis().unwrap()).unwrap();
        let spectral = SpectralPropagator::new(&h.h).unwrap();
        let a = spectral.state_at(&psi, t).unwrap();
        let b = KrylovPropagator::new(&h.h, 30).unwrap().step(psi.amplitudes(), t).unwrap();
        prop_assert!(linalg::distance(a.amplitudes(), &b) < 1e-9);
        let back = spectral.state_at(&a, -t).unwrap();
        prop_assert!(linalg::distance(back.amplitudes(), psi.amplitudes()) < 1e-9);
    }
}
