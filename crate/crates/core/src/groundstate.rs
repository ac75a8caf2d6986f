// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Ground-state energy of the coupled Hamiltonian and the normal /
//! superradiant classification across coupling space.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CavityBasis, Operator};
use crate::linalg::{self, CsrMatrix};
use crate::model::{CouplingTemplates, ModelParams};

/// `E_g` above `-PHASE_TOL` is classified as the normal phase.
pub const PHASE_TOL: f64 = 1e-6;
/// Joint dimensions below this are solved densely.
pub const DENSE_LIMIT: usize = 2000;
/// Cutoff doubling stops once `E_g` moves by less than this.
pub const CUTOFF_TOL: f64 = 1e-7;
const MAX_CUTOFF: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Normal,
    Superradiant,
}

impl Phase {
    pub fn classify(e_g: f64) -> Self {
        if e_g > -PHASE_TOL {
            Phase::Normal
        } else {
            Phase::Superradiant
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Superradiant => "superradiant",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub g12: f64,
    pub g23: f64,
    pub e_g: f64,
    pub phase: Phase,
    /// Photon cutoff the energy was converged at.
    pub n_max: usize,
}

/// Outcome of the Lanczos extremal-eigenvalue iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOutcome {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest eigenvalue of a real symmetric sparse matrix by Lanczos with full
/// reorthogonalization and explicit restarts from the current Ritz vector.
pub fn lanczos_smallest(h: &CsrMatrix, tol: f64) -> Result<LanczosOutcome> {
    let n = h.nrows();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let max_basis = n.min(240);
    let max_restarts = 40;
    // deterministic start vector with support on every basis state
    let mut start: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.7548776662).sin()).collect();
    normalize(&mut start);
    let mut iterations = 0;
    let mut last = (f64::NAN, f64::INFINITY);
    for _ in 0..max_restarts {
        let mut basis = vec![start.clone()];
        let mut alphas = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        for j in 0..max_basis {
            matvec_real(h, &basis[j], &mut w);
            iterations += 1;
            let alpha = dot(&basis[j], &w);
            axpy(-alpha, &basis[j], &mut w);
            if j > 0 {
                axpy(-betas[j - 1], &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            alphas.push(alpha);
            let beta = dot(&w, &w).sqrt();
            let m = j + 1;
            let breakdown = beta <= 1e-13 * (alpha.abs() + 1.0);
            if breakdown || m % 10 == 0 || m == max_basis {
                let (theta, s) = smallest_ritz(&alphas, &betas)?;
                let residual = if breakdown { 0.0 } else { beta * s[m - 1].abs() };
                last = (theta, residual);
                if residual <= tol {
                    return Ok(LanczosOutcome { value: theta, residual, iterations });
                }
                if breakdown || m == max_basis {
                    // restart from the Ritz vector
                    let mut ritz = vec![0.0; n];
                    for (v, &sk) in basis.iter().zip(&s) {
                        axpy(sk, v, &mut ritz);
                    }
                    normalize(&mut ritz);
                    start = ritz;
                    break;
                }
            }
            betas.push(beta);
            let inv = 1.0 / beta;
            basis.push(w.iter().map(|x| x * inv).collect());
        }
    }
    Err(Error::Numerical(format!(
        "Lanczos did not converge: {iterations} iterations, last Ritz value {}, residual {:e} (tol {tol:e})",
        last.0, last.1
    )))
}

fn smallest_ritz(alphas: &[f64], betas: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = alphas.len();
    let t = faer::Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let (vals, vecs) = linalg::symmetric_eigen(t.as_ref())?;
    Ok((vals[0], (0..m).map(|i| vecs[(i, 0)]).collect()))
}

fn matvec_real(h: &CsrMatrix, x: &[f64], y: &mut [f64]) {
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = h.row(i).map(|(j, v)| v * x[j]).sum();
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// Smallest eigenvalue by dense diagonalization of each connected block.
pub fn dense_smallest(h: &Operator) -> Result<f64> {
    let mut best = f64::INFINITY;
    for block in h.matrix().connected_components() {
        let dense = h.matrix().principal_block(&block);
        let vals = linalg::symmetric_eigenvalues(dense.as_ref())?;
        best = best.min(vals[0]);
    }
    Ok(best)
}

/// Dense below [`DENSE_LIMIT`], Lanczos above.
pub fn smallest_eigenvalue(h: &Operator) -> Result<f64> {
    if h.dim() < DENSE_LIMIT {
        dense_smallest(h)
    } else {
        Ok(lanczos_smallest(h.matrix(), 1e-10)?.value)
    }
}

fn default_start_cutoff(params: &ModelParams) -> usize {
    params.n_max.unwrap_or(2 * params.n_atoms + 8)
}

/// Ground-state solver reusing the coupling-independent operators for each
/// cutoff on the doubling ladder.
pub struct GroundStateSolver {
    params: ModelParams,
    start: usize,
    ladder: Vec<OnceLock<Result<CouplingTemplates>>>,
}

impl GroundStateSolver {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let start = default_start_cutoff(params);
        let mut rungs = 1;
        while (start << (rungs - 1)) < MAX_CUTOFF {
            rungs += 1;
        }
        Ok(Self { params: params.clone(), start, ladder: (0..rungs).map(|_| OnceLock::new()).collect() })
    }

    fn templates(&self, rung: usize) -> Result<&CouplingTemplates> {
        let n_max = self.start << rung;
        self.ladder[rung]
            .get_or_init(|| {
                let cavity = CavityBasis::new(n_max)?;
                CouplingTemplates::new(&self.params, &cavity, &self.params.atom_basis()?)
            })
            .as_ref()
            .map_err(|e| Error::Numerical(format!("building operators at n_max = {n_max}: {e}")))
    }

    pub fn energy_at_rung(&self, g12: f64, g23: f64, rung: usize) -> Result<f64> {
        smallest_eigenvalue(&self.templates(rung)?.hamiltonian(g12, g23)?)
    }

    /// Doubles the cutoff until `E_g` changes by less than [`CUTOFF_TOL`].
    pub fn solve(&self, g12: f64, g23: f64) -> Result<PhasePoint> {
        if !(g12.is_finite() && g23.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        let mut previous = self.energy_at_rung(g12, g23, 0)?;
        for rung in 1..self.ladder.len() {
            let e = self.energy_at_rung(g12, g23, rung)?;
            if (e - previous).abs() < CUTOFF_TOL {
                return Ok(PhasePoint { g12, g23, e_g: e, phase: Phase::classify(e), n_max: self.start << rung });
            }
            previous = e;
        }
        Err(Error::Truncation { n_max: self.start << (self.ladder.len() - 1), leakage: f64::NAN })
    }
}

/// Ground energy at the couplings of `params`, with the cutoff policy above.
pub fn ground_energy(params: &ModelParams) -> Result<PhasePoint> {
    GroundStateSolver::new(params)?.solve(params.g12, params.g23)
}

/// Evenly spaced coupling values, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRange {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl CouplingRange {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        let r = Self { start, end, points };
        r.validate()?;
        Ok(r)
    }

    pub fn single(value: f64) -> Self {
        Self { start: value, end: value, points: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 || !self.start.is_finite() || !self.end.is_finite() || (self.points > 1 && self.end < self.start) {
            return Err(Error::InvalidParameter(format!("empty or malformed coupling range {self:?}")));
        }
        if self.points == 1 && self.start != self.end {
            return Err(Error::InvalidParameter(format!("one-point range must have start == end: {self:?}")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let span = self.end - self.start;
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.end } else { self.start + span * i as f64 / last })
            .collect()
    }
}

/// Ground energies on the grid `g23 (outer) x g12 (inner)`, in that row order.
/// Runs on the current rayon pool; order does not depend on scheduling.
pub fn phase_scan(g12: &CouplingRange, g23: &CouplingRange, params: &ModelParams) -> Result<Vec<PhasePoint>> {
    g12.validate()?;
    g23.validate()?;
    let solver = GroundStateSolver::new(params)?;
    let points: Vec<(f64, f64)> = g23.values().into_iter().flat_map(|b| g12.values().into_iter().map(move |a| (a, b))).collect();
    points.par_iter().map(|&(a, b)| solver.solve(a, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize) -> ModelParams {
        ModelParams::default().with_atoms(n)
    }

    #[test]
    fn zero_coupling_ground_energy_is_exactly_zero() {
        let p = ground_energy(&params(6).with_couplings(0.0, 0.0)).unwrap();
        assert_eq!(p.e_g, 0.0);
        assert_eq!(p.phase, Phase::Normal);
    }

    #[test]
    fn gauge_symmetry_of_ground_energy() {
        let base = ground_energy(&params(3).with_couplings(0.9, 0.6)).unwrap().e_g;
        for (a, b) in [(0.9, -0.6), (-0.9, 0.6), (-0.9, -0.6)] {
            let e = ground_energy(&params(3).with_couplings(a, b)).unwrap().e_g;
            assert!((e - base).abs() < 1e-9, "({a}, {b}): {e} vs {base}");
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        let p = params(4).with_couplings(1.2, 0.7);
        let cavity = CavityBasis::new(60).unwrap();
        let t = CouplingTemplates::new(&p, &cavity, &p.atom_basis().unwrap()).unwrap();
        let h = t.hamiltonian(1.2, 0.7).unwrap();
        assert!(h.dim() <= DENSE_LIMIT);
        let dense = dense_smallest(&h).unwrap();
        let lz = lanczos_smallest(h.matrix(), 1e-10).unwrap();
        assert!((dense - lz.value).abs() < 1e-8, "{dense} vs {}", lz.value);
    }

    #[test]
    fn strong_diagonal_coupling_is_superradiant() {
        let p = ground_energy(&params(6).with_couplings(0.8, 0.8)).unwrap();
        assert!(p.e_g < 0.0);
        assert_eq!(p.phase, Phase::Superradiant);
    }

    #[test]
    fn ranges() {
        assert_eq!(CouplingRange::new(0.0, 2.0, 41).unwrap().values()[10], 0.5);
        assert_eq!(*CouplingRange::new(0.0, 2.0, 41).unwrap().values().last().unwrap(), 2.0);
        assert!(CouplingRange::new(0.0, 1.0, 0).is_err());
        assert_eq!(CouplingRange::single(0.3).values(), vec![0.3]);
    }
}
