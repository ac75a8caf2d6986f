// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Battery, charger and interaction Hamiltonians, and the three
//! equal-energy charger states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, AtomBasis, BasisTag, CavityBasis, JointState, Operator};
use crate::C64;

/// Tail probability above the cutoff allowed for an initial charger state.
pub const CHARGER_TAIL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargerKind {
    Fock,
    Coherent,
    Squeezed,
}

impl ChargerKind {
    pub const ALL: [ChargerKind; 3] = [ChargerKind::Fock, ChargerKind::Coherent, ChargerKind::Squeezed];

    pub fn name(&self) -> &'static str {
        match self {
            ChargerKind::Fock => "fock",
            ChargerKind::Coherent => "coherent",
            ChargerKind::Squeezed => "squeezed",
        }
    }
}

impl std::fmt::Display for ChargerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ChargerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fock" => Ok(ChargerKind::Fock),
            "coherent" => Ok(ChargerKind::Coherent),
            "squeezed" => Ok(ChargerKind::Squeezed),
            other => Err(Error::InvalidParameter(format!("unknown charger kind '{other}'"))),
        }
    }
}

/// Physical and truncation parameters. Energies are in units of the cavity
/// quantum, times in its inverse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_atoms: usize,
    pub omega_c: f64,
    /// Level energies `omega_1 < omega_2 < omega_3`.
    pub omega: [f64; 3],
    pub g12: f64,
    pub g23: f64,
    /// Photon cutoff; `None` selects it from the charger's tail.
    pub n_max: Option<usize>,
    pub charger: ChargerKind,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_atoms: 6,
            omega_c: 1.0,
            omega: [0.0, 1.0, 1.95],
            g12: 1.0,
            g23: 1.0,
            n_max: None,
            charger: ChargerKind::Coherent,
        }
    }
}

impl ModelParams {
    pub fn with_charger(mut self, charger: ChargerKind) -> Self {
        self.charger = charger;
        self
    }

    pub fn with_couplings(mut self, g12: f64, g23: f64) -> Self {
        self.g12 = g12;
        self.g23 = g23;
        self
    }

    pub fn with_atoms(mut self, n_atoms: usize) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    pub fn with_n_max(mut self, n_max: Option<usize>) -> Self {
        self.n_max = n_max;
        self
    }

    /// Coupling signs are accepted: flipping a sign is a gauge transformation
    /// and the symmetry checks rely on it.
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !(self.omega_c.is_finite() && self.omega_c > 0.0) {
            return Err(Error::InvalidParameter(format!("omega_c = {} must be positive", self.omega_c)));
        }
        let [w1, w2, w3] = self.omega;
        if !(w1.is_finite() && w3.is_finite() && w1 < w2 && w2 < w3) {
            return Err(Error::InvalidParameter(format!("level energies {:?} must be strictly increasing", self.omega)));
        }
        if !(self.g12.is_finite() && self.g23.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        if let Some(n) = self.n_max {
            if n < 1 {
                return Err(Error::InvalidParameter("n_max must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Explicit cutoff, or the smallest one that holds the charger tail below
    /// [`CHARGER_TAIL_TOL`] with the top three Fock levels initially empty.
    pub fn resolved_n_max(&self) -> usize {
        self.n_max.unwrap_or_else(|| auto_cutoff(self.charger, self.n_atoms))
    }

    pub fn cavity_basis(&self) -> Result<CavityBasis> {
        CavityBasis::new(self.resolved_n_max())
    }

    pub fn atom_basis(&self) -> Result<AtomBasis> {
        hilbert::enumerate_atom_basis(self.n_atoms)
    }

    /// Mean photon number every charger carries: `2N`.
    pub fn charger_photons(&self) -> f64 {
        2.0 * self.n_atoms as f64
    }
}

/// Operators of the model on the joint basis, plus the atomic `H_B` and the
/// two coupling-independent interaction templates.
#[derive(Clone, Debug)]
pub struct Hamiltonians {
    pub h_a: Operator,
    pub h_b: Operator,
    pub h_i: Operator,
    pub h: Operator,
    /// `sum_i omega_i A_ii` on the atom basis.
    pub h_b_atomic: Operator,
    /// `(a^dag + a)(A_12 + A_21) / sqrt(N)`.
    pub coupling_12: Operator,
    /// `(a^dag + a)(A_23 + A_32) / sqrt(N)`.
    pub coupling_23: Operator,
}

pub fn build_hamiltonians(params: &ModelParams, cavity: &CavityBasis, atoms: &AtomBasis) -> Result<Hamiltonians> {
    params.validate()?;
    if atoms.n_atoms() != params.n_atoms {
        return Err(Error::DimensionMismatch(format!("atom basis for N = {} but params say N = {}", atoms.n_atoms(), params.n_atoms)));
    }
    if let Some(n) = params.n_max {
        if n != cavity.n_max() {
            return Err(Error::DimensionMismatch(format!("cavity basis n_max = {} but params say {n}", cavity.n_max())));
        }
    }
    let templates = CouplingTemplates::new(params, cavity, atoms)?;
    let h_i = templates.interaction(params.g12, params.g23)?;
    let h = templates.h0.add(&h_i)?;
    Ok(Hamiltonians {
        h_a: templates.h_a,
        h_b: templates.h_b,
        h_i,
        h,
        h_b_atomic: templates.h_b_atomic,
        coupling_12: templates.coupling_12,
        coupling_23: templates.coupling_23,
    })
}

/// Coupling-independent parts of `H`; `H(g12, g23) = h0 + g12 c12 + g23 c23`.
#[derive(Clone, Debug)]
pub struct CouplingTemplates {
    pub h_a: Operator,
    pub h_b: Operator,
    pub h0: Operator,
    pub h_b_atomic: Operator,
    pub coupling_12: Operator,
    pub coupling_23: Operator,
}

impl CouplingTemplates {
    pub fn new(params: &ModelParams, cavity: &CavityBasis, atoms: &AtomBasis) -> Result<Self> {
        let cav_id = Operator::identity(BasisTag::Cavity { dim: cavity.dim() });
        let atom_id = Operator::identity(BasisTag::Atom { dim: atoms.dim() });
        let a = hilbert::annihilator(cavity);
        let quadrature = a.add(&a.adjoint())?;

        let h_a = hilbert::tensor(&hilbert::number_op(cavity).scale(params.omega_c), &atom_id)?;
        let mut h_b_atomic = hilbert::collective_op(1, 1, atoms)?.scale(params.omega[0]);
        for level in 2..=3 {
            h_b_atomic = h_b_atomic.lin_comb(1.0, &hilbert::collective_op(level, level, atoms)?, params.omega[level - 1])?;
        }
        let h_b = hilbert::tensor(&cav_id, &h_b_atomic)?;

        let inv_sqrt_n = 1.0 / (params.n_atoms as f64).sqrt();
        let x12 = hilbert::collective_op(1, 2, atoms)?.add(&hilbert::collective_op(2, 1, atoms)?)?;
        let x23 = hilbert::collective_op(2, 3, atoms)?.add(&hilbert::collective_op(3, 2, atoms)?)?;
        let coupling_12 = hilbert::tensor(&quadrature, &x12)?.scale(inv_sqrt_n);
        let coupling_23 = hilbert::tensor(&quadrature, &x23)?.scale(inv_sqrt_n);
        let h0 = h_a.add(&h_b)?;
        Ok(Self { h_a, h_b, h0, h_b_atomic, coupling_12, coupling_23 })
    }

    pub fn interaction(&self, g12: f64, g23: f64) -> Result<Operator> {
        self.coupling_12.lin_comb(g12, &self.coupling_23, g23)
    }

    pub fn hamiltonian(&self, g12: f64, g23: f64) -> Result<Operator> {
        self.h0.add(&self.interaction(g12, g23)?)
    }
}

/// Initial cavity state.
#[derive(Clone, Debug, PartialEq)]
pub struct ChargerState {
    pub kind: ChargerKind,
    pub amplitudes: Vec<C64>,
}

impl ChargerState {
    pub fn mean_photons(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.amplitudes)
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Signed amplitudes `c_0..=c_len-1` of the untruncated charger state.
fn charger_amplitudes(kind: ChargerKind, n_atoms: usize, len: usize) -> Vec<f64> {
    let photons = 2 * n_atoms;
    match kind {
        ChargerKind::Fock => (0..len).map(|n| if n == photons { 1.0 } else { 0.0 }).collect(),
        ChargerKind::Coherent => {
            // c_n = exp(-|alpha|^2 / 2) alpha^n / sqrt(n!), alpha = sqrt(2N)
            let mean = photons as f64;
            let ln_alpha = 0.5 * mean.ln();
            let lf = ln_factorials(len);
            (0..len).map(|n| (-0.5 * mean + n as f64 * ln_alpha - 0.5 * lf[n]).exp()).collect()
        }
        ChargerKind::Squeezed => {
            // S(r)|0> with S(r) = exp(r (a^2 - a^dag^2) / 2), sinh^2 r = 2N:
            // c_2m = (-tanh r)^m sqrt((2m)!) / (2^m m!) / sqrt(cosh r)
            let sinh2 = photons as f64;
            let cosh = (1.0 + sinh2).sqrt();
            let ln_tanh = (sinh2.sqrt() / cosh).ln();
            let lf = ln_factorials(len);
            (0..len)
                .map(|n| {
                    if n % 2 == 1 {
                        return 0.0;
                    }
                    let m = n / 2;
                    let ln_mag = m as f64 * ln_tanh + 0.5 * lf[n] - m as f64 * std::f64::consts::LN_2 - lf[m] - 0.5 * cosh.ln();
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    sign * ln_mag.exp()
                })
                .collect()
        }
    }
}

/// Probability the untruncated charger state puts above `n_max`.
pub fn charger_tail(kind: ChargerKind, n_atoms: usize, n_max: usize) -> f64 {
    match kind {
        ChargerKind::Fock => {
            if 2 * n_atoms > n_max {
                1.0
            } else {
                0.0
            }
        }
        _ => {
            let horizon = tail_horizon(kind, n_atoms).max(n_max + 2);
            let amps = charger_amplitudes(kind, n_atoms, horizon);
            amps[n_max + 1..].iter().rev().map(|c| c * c).sum()
        }
    }
}

/// Length beyond which the charger's photon distribution is below 1e-30
/// per level (and decaying).
fn tail_horizon(kind: ChargerKind, n_atoms: usize) -> usize {
    let mean = 2.0 * n_atoms as f64;
    match kind {
        ChargerKind::Fock => 2 * n_atoms + 1,
        ChargerKind::Coherent => (mean + 40.0 * mean.sqrt() + 60.0) as usize,
        // per-pair ratio tanh^2 r = 2N / (2N + 1); 1e-30 needs ~69 (2N + 1) pairs
        ChargerKind::Squeezed => (2.0 * 70.0 * (mean + 1.0)) as usize + 20,
    }
}

/// Smallest cutoff whose tail is below [`CHARGER_TAIL_TOL`].
pub fn tail_cutoff(kind: ChargerKind, n_atoms: usize) -> usize {
    if kind == ChargerKind::Fock {
        return 2 * n_atoms;
    }
    let horizon = tail_horizon(kind, n_atoms);
    let amps = charger_amplitudes(kind, n_atoms, horizon);
    let mut tail = 0.0;
    // walk down from the horizon; the first index where adding p_n would
    // break the bound is the cutoff
    for n in (0..horizon).rev() {
        let next = tail + amps[n] * amps[n];
        if next >= CHARGER_TAIL_TOL {
            return n.max(1);
        }
        tail = next;
    }
    1
}

/// Default cutoff: tail cutoff plus three levels, so the truncation monitor
/// (population of the top three Fock levels) starts at the tail tolerance.
pub fn auto_cutoff(kind: ChargerKind, n_atoms: usize) -> usize {
    tail_cutoff(kind, n_atoms) + 3
}

pub fn charger_state(params: &ModelParams, cavity: &CavityBasis) -> Result<ChargerState> {
    params.validate()?;
    let tail = charger_tail(params.charger, params.n_atoms, cavity.n_max());
    if tail > CHARGER_TAIL_TOL {
        return Err(Error::Truncation { n_max: cavity.n_max(), leakage: tail });
    }
    let amps = charger_amplitudes(params.charger, params.n_atoms, cavity.dim());
    let norm = amps.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(ChargerState { kind: params.charger, amplitudes: amps.iter().map(|&c| C64::new(c / norm, 0.0)).collect() })
}

/// Charger state times all atoms in |1>, i.e. configuration `(N, 0, 0)`.
pub fn initial_joint_state(params: &ModelParams) -> Result<JointState> {
    let cavity = params.cavity_basis()?;
    let atoms = params.atom_basis()?;
    initial_joint_state_in(params, &cavity, &atoms)
}

pub fn initial_joint_state_in(params: &ModelParams, cavity: &CavityBasis, atoms: &AtomBasis) -> Result<JointState> {
    let charger = charger_state(params, cavity)?;
    let mut atom = vec![C64::new(0.0, 0.0); atoms.dim()];
    let ground = atoms
        .index_of(hilbert::AtomConfig::new(params.n_atoms, 0, 0))
        .expect("(N, 0, 0) is always in the basis");
    atom[ground] = C64::new(1.0, 0.0);
    JointState::product(&charger.amplitudes, &atom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn small(n: usize, n_max: usize, g12: f64, g23: f64) -> (ModelParams, Hamiltonians) {
        let p = ModelParams::default().with_atoms(n).with_couplings(g12, g23).with_n_max(Some(n_max));
        let h = build_hamiltonians(&p, &p.cavity_basis().unwrap(), &p.atom_basis().unwrap()).unwrap();
        (p, h)
    }

    #[test]
    fn hand_written_single_atom_hamiltonian() {
        let (g12, g23) = (0.3, 0.7);
        let (_, h) = small(1, 1, g12, g23);
        // basis: (n=0; |1>,|2>,|3>), (n=1; |1>,|2>,|3>)
        #[rustfmt::skip]
        let expect = [
            [0.0, 0.0, 0.0,  0.0, g12, 0.0],
            [0.0, 1.0, 0.0,  g12, 0.0, g23],
            [0.0, 0.0, 1.95, 0.0, g23, 0.0],
            [0.0, g12, 0.0,  1.0, 0.0, 0.0],
            [g12, 0.0, g23,  0.0, 2.0, 0.0],
            [0.0, g23, 0.0,  0.0, 0.0, 2.95],
        ];
        for (i, row) in expect.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!((h.h.get(i, j) - v).abs() < 1e-15, "H[{i}][{j}]");
            }
        }
    }

    #[test]
    fn hamiltonians_are_hermitian_and_interaction_has_zero_diagonal() {
        for &(g12, g23) in &[(0.2, 1.3), (1.0, 1.0), (1.7, 0.4)] {
            let (_, h) = small(3, 7, g12, g23);
            for op in [&h.h_a, &h.h_b, &h.h_i, &h.h] {
                assert!(op.is_hermitian(1e-12));
            }
            assert!(h.h_i.matrix().diagonal_values().iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn decoupled_energy_is_charger_energy() {
        for kind in ChargerKind::ALL {
            let p = ModelParams::default().with_atoms(2).with_couplings(0.0, 0.0).with_charger(kind);
            let cav = p.cavity_basis().unwrap();
            let atoms = p.atom_basis().unwrap();
            let h = build_hamiltonians(&p, &cav, &atoms).unwrap();
            let psi = initial_joint_state_in(&p, &cav, &atoms).unwrap();
            let e = h.h.expectation(psi.amplitudes()).re;
            assert!((e - 4.0).abs() < 1e-6 * 4.0, "{kind}: {e}");
            assert!(h.h_b.expectation(psi.amplitudes()).re.abs() < 1e-14);
        }
    }

    #[test]
    fn spectrum_invariant_under_coupling_sign_flips() {
        let spectrum = |g12: f64, g23: f64| {
            let (_, h) = small(2, 6, g12, g23);
            linalg::symmetric_eigenvalues(h.h.to_dense().as_ref()).unwrap()
        };
        let base = spectrum(0.7, 1.1);
        for (a, b) in [(-0.7, -1.1), (-0.7, 1.1), (0.7, -1.1)] {
            let other = spectrum(a, b);
            let worst = base.iter().zip(&other).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-9, "({a}, {b}): {worst}");
        }
    }

    #[test]
    fn fock_charger_is_a_number_state() {
        let p = ModelParams::default().with_charger(ChargerKind::Fock);
        let s = charger_state(&p, &p.cavity_basis().unwrap()).unwrap();
        for (n, z) in s.amplitudes.iter().enumerate() {
            assert_eq!(z.re, if n == 12 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn coherent_and_squeezed_chargers_carry_two_n_photons() {
        for kind in [ChargerKind::Coherent, ChargerKind::Squeezed] {
            let p = ModelParams::default().with_charger(kind);
            let s = charger_state(&p, &p.cavity_basis().unwrap()).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-10);
            assert!((s.mean_photons() - 12.0).abs() < 1e-6, "{kind}: {}", s.mean_photons());
        }
    }

    #[test]
    fn squeezed_charger_has_even_support_and_zero_mean_field() {
        let p = ModelParams::default().with_charger(ChargerKind::Squeezed);
        let s = charger_state(&p, &p.cavity_basis().unwrap()).unwrap();
        let mut mean_a = C64::new(0.0, 0.0);
        for n in 1..s.amplitudes.len() {
            mean_a += s.amplitudes[n - 1].conj() * s.amplitudes[n] * (n as f64).sqrt();
        }
        assert!(mean_a.norm() < 1e-12);
        assert!(s.amplitudes.iter().skip(1).step_by(2).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn explicit_cutoff_too_small_is_a_truncation_error() {
        let p = ModelParams::default().with_charger(ChargerKind::Coherent).with_n_max(Some(20));
        assert!(matches!(charger_state(&p, &p.cavity_basis().unwrap()), Err(Error::Truncation { .. })));
        let p = ModelParams::default().with_charger(ChargerKind::Fock).with_n_max(Some(11));
        assert!(matches!(charger_state(&p, &p.cavity_basis().unwrap()), Err(Error::Truncation { .. })));
    }

    #[test]
    fn tail_cutoffs_match_distribution() {
        for kind in [ChargerKind::Coherent, ChargerKind::Squeezed] {
            for n in [1, 3, 6] {
                let cut = tail_cutoff(kind, n);
                assert!(charger_tail(kind, n, cut) < CHARGER_TAIL_TOL);
                assert!(charger_tail(kind, n, cut - 1) >= CHARGER_TAIL_TOL);
            }
        }
        assert_eq!(tail_cutoff(ChargerKind::Squeezed, 6), 522);
        assert_eq!(tail_cutoff(ChargerKind::Coherent, 6), 40);
    }

    #[test]
    fn validation() {
        assert!(ModelParams::default().with_atoms(0).validate().is_err());
        let mut p = ModelParams::default();
        p.omega = [0.0, 2.0, 1.95];
        assert!(p.validate().is_err());
        assert!(ModelParams::default().with_couplings(f64::NAN, 1.0).validate().is_err());
    }
}
