// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dicke_qb::dynamics::{KrylovPropagator, SpectralPropagator};
use dicke_qb::groundstate::GroundStateSolver;
use dicke_qb::hilbert::{self, Subsystem};
use dicke_qb::model::{self, ChargerKind, ModelParams};
use dicke_qb::observables::RecordEvaluator;
use dicke_qb::phasespace::{self, PhaseGrid};

fn setup(n: usize, kind: ChargerKind, n_max: usize) -> (model::Hamiltonians, dicke_qb::JointState) {
    let p = ModelParams::default().with_atoms(n).with_charger(kind).with_n_max(Some(n_max));
    let cav = p.cavity_basis().unwrap();
    let atoms = p.atom_basis().unwrap();
    let h = model::build_hamiltonians(&p, &cav, &atoms).unwrap();
    let psi = model::initial_joint_state_in(&p, &cav, &atoms).unwrap();
    (h, psi)
}

fn hamiltonian(c: &mut Criterion) {
    let p = ModelParams::default().with_n_max(Some(144));
    let cav = p.cavity_basis().unwrap();
    let atoms = p.atom_basis().unwrap();
    c.bench_function("build_hamiltonians N=6 n_max=144", |b| {
        b.iter(|| model::build_hamiltonians(black_box(&p), &cav, &atoms).unwrap())
    });
}

fn propagation(c: &mut Criterion) {
    let (h, psi) = setup(6, ChargerKind::Coherent, 144);
    let k = KrylovPropagator::new(&h.h, 40).unwrap();
    c.bench_function("krylov step dt=0.01 N=6 n_max=144", |b| b.iter(|| k.step(black_box(psi.amplitudes()), 0.01).unwrap()));

    let (h, psi) = setup(4, ChargerKind::Coherent, 40);
    let mut g = c.benchmark_group("spectral");
    g.sample_size(10);
    g.bench_function("diagonalize N=4 n_max=40", |b| b.iter(|| SpectralPropagator::for_state(&h.h, &psi).unwrap()));
    let prop = SpectralPropagator::for_state(&h.h, &psi).unwrap();
    g.bench_function("state_at N=4 n_max=40", |b| b.iter(|| prop.state_at(&psi, black_box(1.3)).unwrap()));
    g.finish();
}

fn observables(c: &mut Criterion) {
    let (h, psi) = setup(6, ChargerKind::Coherent, 144);
    let k = KrylovPropagator::new(&h.h, 40).unwrap();
    let amps = k.step(psi.amplitudes(), 0.8).unwrap();
    let state = dicke_qb::JointState::new(psi.cavity_dim(), psi.atom_dim(), amps).unwrap();
    let eval = RecordEvaluator::new(&h.h_b_atomic).unwrap();
    c.bench_function("record N=6 n_max=144", |b| b.iter(|| eval.record(0.8, black_box(&state)).unwrap()));

    let rho = hilbert::partial_trace(&state, Subsystem::Cavity).unwrap();
    let grid = PhaseGrid::square(7.0, 51).unwrap();
    let mut g = c.benchmark_group("phasespace");
    g.sample_size(10);
    g.bench_function("wigner 51x51 n_max=144", |b| b.iter(|| phasespace::wigner(black_box(&rho), &grid).unwrap()));
    g.finish();
}

fn ground(c: &mut Criterion) {
    let solver = GroundStateSolver::new(&ModelParams::default()).unwrap();
    let mut g = c.benchmark_group("ground");
    g.sample_size(10);
    g.bench_function("ground energy N=6 g=(1,1)", |b| b.iter(|| solver.solve(black_box(1.0), 1.0).unwrap()));
    g.finish();
}

criterion_group!(benches, hamiltonian, propagation, observables, ground);
criterion_main!(benches);
