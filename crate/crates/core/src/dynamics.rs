// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Time evolution `psi(t) = exp(-iHt) psi(0)` on a uniform sample grid.
//!
//! Two independent integrators are provided. [`SpectralPropagator`]
//! diagonalizes `H` once (block by block, over the connected components of
//! its sparsity graph; for the battery these are the two photon-plus-level-2
//! parity sectors) and applies `V exp(-i Lambda t) V^T` to the initial state.
//! [`KrylovPropagator`] is a short-iterative Lanczos scheme that only needs
//! sparse matrix-vector products, with an a posteriori error estimate per
//! step and step halving on failure.

use faer::{Accum, Mat, Par};

use crate::error::{Error, Result};
use crate::hilbert::{JointState, Operator};
use crate::linalg::{self, CsrMatrix};
use crate::C64;

/// Uniform grid `0 = t_0 < t_1 < ... < t_{n-1} = t_end`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    samples: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_samples: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidParameter(format!("t_end = {t_end} must be positive")));
        }
        if n_samples < 2 {
            return Err(Error::InvalidParameter("a time grid needs at least 2 samples".into()));
        }
        let h = t_end / (n_samples - 1) as f64;
        let mut samples: Vec<f64> = (0..n_samples).map(|i| i as f64 * h).collect();
        samples[n_samples - 1] = t_end;
        Ok(Self { t_end, samples })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.t_end / (self.samples.len() - 1) as f64
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::new(20.0, 2001).expect("default grid is valid")
    }
}

/// States at every grid sample.
#[derive(Clone, Debug)]
pub struct StateTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<JointState>,
}

/// Callback receiving `(sample index, time, state)` in increasing time order.
pub type Visitor<'a> = dyn FnMut(usize, f64, &JointState) -> Result<()> + 'a;

fn check_inputs(h: &Operator, psi0: &JointState) -> Result<()> {
    if h.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch(format!("H is {}-dimensional, state {}", h.dim(), psi0.dim())));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > JointState::NORM_TOL {
        return Err(Error::StaleState { norm });
    }
    Ok(())
}

struct SpectralBlock {
    indices: Vec<usize>,
    eigenvalues: Vec<f64>,
    vectors: Mat<f64>,
}

/// Exact propagator from a one-time eigendecomposition of a real symmetric `H`.
pub struct SpectralPropagator {
    dim: usize,
    blocks: Vec<SpectralBlock>,
    /// Basis states of blocks left undiagonalized by [`Self::for_state`].
    skipped: Vec<usize>,
}

/// Number of time samples combined into one matrix product.
const SPECTRAL_BATCH: usize = 32;

impl SpectralPropagator {
    pub fn new(h: &Operator) -> Result<Self> {
        Self::build(h, None)
    }

    /// Diagonalizes only the blocks on which `psi0` has support; the result
    /// propagates `psi0` and any state confined to the same blocks.
    pub fn for_state(h: &Operator, psi0: &JointState) -> Result<Self> {
        check_inputs(h, psi0)?;
        Self::build(h, Some(psi0.amplitudes()))
    }

    fn build(h: &Operator, support: Option<&[C64]>) -> Result<Self> {
        if !h.is_hermitian(1e-12) {
            return Err(Error::InvalidParameter("spectral propagation needs a Hermitian H".into()));
        }
        let (active, idle): (Vec<_>, Vec<_>) = h
            .matrix()
            .connected_components()
            .into_iter()
            .partition(|block| support.map_or(true, |psi| block.iter().any(|&i| psi[i] != C64::new(0.0, 0.0))));
        let skipped: Vec<usize> = idle.into_iter().flatten().collect();
        let blocks = active
            .into_iter()
            .map(|indices| {
                let dense = h.matrix().principal_block(&indices);
                let (eigenvalues, vectors) = linalg::symmetric_eigen(dense.as_ref()).map_err(|e| {
                    Error::Numerical(format!("{e} (block of {} states out of {})", indices.len(), h.dim()))
                })?;
                Ok(SpectralBlock { indices, eigenvalues, vectors })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: h.dim(), blocks, skipped })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sizes of the independently diagonalized blocks.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.indices.len()).collect()
    }

    /// All eigenvalues of `H`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.blocks.iter().flat_map(|b| b.eigenvalues.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Eigenbasis coefficients `V^T psi` per block.
    fn coefficients(&self, psi: &[C64]) -> Vec<Vec<C64>> {
        self.blocks
            .iter()
            .map(|b| {
                let v = &b.vectors;
                (0..b.indices.len())
                    .map(|k| {
                        let mut acc = C64::new(0.0, 0.0);
                        for (a, &i) in b.indices.iter().enumerate() {
                            acc += psi[i] * v[(a, k)];
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// States at arbitrary (also negative) times.
    pub fn states_at(&self, psi0: &JointState, times: &[f64], visit: &mut dyn FnMut(usize, f64, JointState) -> Result<()>) -> Result<()> {
        if psi0.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!("propagator is {}-dimensional, state {}", self.dim, psi0.dim())));
        }
        if self.skipped.iter().any(|&i| psi0.amplitudes()[i] != C64::new(0.0, 0.0)) {
            return Err(Error::InvalidState("state has support on blocks this propagator did not diagonalize".into()));
        }
        let coeffs = self.coefficients(psi0.amplitudes());
        for (chunk_idx, chunk) in times.chunks(SPECTRAL_BATCH).enumerate() {
            let k = chunk.len();
            let mut out = vec![vec![C64::new(0.0, 0.0); self.dim]; k];
            for (block, c) in self.blocks.iter().zip(&coeffs) {
                let d = block.indices.len();
                // real and imaginary parts of exp(-i lambda t) c side by side
                let z = Mat::<f64>::from_fn(d, 2 * k, |a, col| {
                    let phase = C64::from_polar(1.0, -block.eigenvalues[a] * chunk[col / 2]) * c[a];
                    if col % 2 == 0 {
                        phase.re
                    } else {
                        phase.im
                    }
                });
                let mut y = Mat::<f64>::zeros(d, 2 * k);
                faer::linalg::matmul::matmul(y.as_mut(), Accum::Replace, block.vectors.as_ref(), z.as_ref(), 1.0, Par::Seq);
                for (s, state) in out.iter_mut().enumerate() {
                    for (a, &i) in block.indices.iter().enumerate() {
                        state[i] = C64::new(y[(a, 2 * s)], y[(a, 2 * s + 1)]);
                    }
                }
            }
            for (s, amps) in out.into_iter().enumerate() {
                // exp(-iH 0) is the identity; skip the round trip through V V^T
                let state = if chunk[s] == 0.0 {
                    psi0.clone()
                } else {
                    JointState::unchecked(psi0.cavity_dim(), psi0.atom_dim(), amps)?
                };
                visit(chunk_idx * SPECTRAL_BATCH + s, chunk[s], state)?;
            }
        }
        Ok(())
    }

    pub fn state_at(&self, psi0: &JointState, t: f64) -> Result<JointState> {
        let mut out = None;
        self.states_at(psi0, &[t], &mut |_, _, s| {
            out = Some(s);
            Ok(())
        })?;
        Ok(out.expect("one sample requested"))
    }

    pub fn evolve(&self, psi0: &JointState, grid: &TimeGrid, visit: &mut Visitor<'_>) -> Result<()> {
        self.states_at(psi0, grid.samples(), &mut |i, t, s| visit(i, t, &s))
    }
}

/// Spectral reference propagation, storing every sample.
pub fn propagate_spectral(h: &Operator, psi0: &JointState, grid: &TimeGrid) -> Result<StateTrajectory> {
    check_inputs(h, psi0)?;
    let prop = SpectralPropagator::for_state(h, psi0)?;
    let mut states = Vec::with_capacity(grid.len());
    prop.evolve(psi0, grid, &mut |_, _, s| {
        states.push(s.clone());
        Ok(())
    })?;
    Ok(StateTrajectory { grid: grid.clone(), states })
}

/// Short-iterative Lanczos propagator.
#[derive(Clone, Debug)]
pub struct KrylovPropagator<'a> {
    h: &'a CsrMatrix,
    max_dim: usize,
    tol: f64,
    max_halvings: u32,
}

impl<'a> KrylovPropagator<'a> {
    /// Default per-step error bound; comfortably inside the 1e-10 budget.
    pub const DEFAULT_TOL: f64 = 1e-12;

    pub fn new(h: &'a Operator, max_dim: usize) -> Result<Self> {
        if max_dim < 4 {
            return Err(Error::InvalidParameter(format!("Krylov dimension {max_dim} must be at least 4")));
        }
        if !h.is_hermitian(1e-12) {
            return Err(Error::InvalidParameter("Lanczos propagation needs a Hermitian H".into()));
        }
        Ok(Self { h: h.matrix(), max_dim, tol: Self::DEFAULT_TOL, max_halvings: 12 })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Advances `psi` by `dt` (which may be negative), halving the step while
    /// the Lanczos error estimate exceeds the tolerance.
    pub fn step(&self, psi: &[C64], dt: f64) -> Result<Vec<C64>> {
        self.step_at_depth(psi, dt, 0)
    }

    fn step_at_depth(&self, psi: &[C64], dt: f64, depth: u32) -> Result<Vec<C64>> {
        if let Some(next) = self.try_step(psi, dt)? {
            return Ok(next);
        }
        if depth >= self.max_halvings {
            return Err(Error::Integration(format!(
                "Lanczos step did not reach tolerance {:e} with dimension {} after {depth} halvings (dt = {dt:e})",
                self.tol, self.max_dim
            )));
        }
        let half = self.step_at_depth(psi, 0.5 * dt, depth + 1)?;
        self.step_at_depth(&half, 0.5 * dt, depth + 1)
    }

    fn try_step(&self, psi: &[C64], dt: f64) -> Result<Option<Vec<C64>>> {
        let n = psi.len();
        let beta0 = linalg::norm(psi);
        if beta0 == 0.0 || dt == 0.0 {
            return Ok(Some(psi.to_vec()));
        }
        let mut basis: Vec<Vec<C64>> = vec![psi.iter().map(|z| z / beta0).collect()];
        let mut alphas: Vec<f64> = Vec::with_capacity(self.max_dim);
        let mut betas: Vec<f64> = Vec::with_capacity(self.max_dim);
        let mut w = vec![C64::new(0.0, 0.0); n];
        for j in 0..self.max_dim {
            self.h.mul_vec_into(&basis[j], &mut w);
            let alpha = linalg::inner(&basis[j], &w).re;
            for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                *wi -= vi * alpha;
            }
            if j > 0 {
                let b = betas[j - 1];
                for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= vi * b;
                }
            }
            // full reorthogonalization keeps the small tridiagonal faithful
            for v in &basis {
                let c = linalg::inner(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= vi * c;
                }
            }
            alphas.push(alpha);
            let beta = linalg::norm(&w);
            let m = j + 1;
            let breakdown = beta <= 1e-14 * (alpha.abs() + betas.last().copied().unwrap_or(0.0) + 1.0);
            let check = breakdown || m == self.max_dim || (m >= 6 && m % 2 == 0);
            if check {
                let y = tridiagonal_expm_e0(&alphas, &betas, dt)?;
                let err = if breakdown { 0.0 } else { beta * y[m - 1].norm() * beta0 };
                if err <= self.tol {
                    let mut out = vec![C64::new(0.0, 0.0); n];
                    for (v, yk) in basis.iter().zip(&y) {
                        let s = yk * beta0;
                        for (o, vi) in out.iter_mut().zip(v) {
                            *o += vi * s;
                        }
                    }
                    return Ok(Some(out));
                }
                if breakdown {
                    return Err(Error::Integration("Lanczos breakdown with nonzero error estimate".into()));
                }
            }
            if m == self.max_dim {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|z| z / beta).collect());
        }
        Ok(None)
    }

    pub fn evolve(&self, psi0: &JointState, grid: &TimeGrid, dt: f64, visit: &mut Visitor<'_>) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) || dt > grid.spacing() * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("Krylov step {dt} must be positive and at most the grid spacing {}", grid.spacing())));
        }
        if psi0.dim() != self.h.nrows() {
            return Err(Error::DimensionMismatch(format!("H is {}-dimensional, state {}", self.h.nrows(), psi0.dim())));
        }
        let samples = grid.samples();
        let mut current = psi0.clone();
        visit(0, samples[0], &current)?;
        for i in 1..samples.len() {
            let interval = samples[i] - samples[i - 1];
            let steps = (interval / dt - 1e-9).ceil().max(1.0) as usize;
            let h = interval / steps as f64;
            let mut amps = current.into_amplitudes();
            for _ in 0..steps {
                amps = self.step(&amps, h)?;
            }
            current = JointState::unchecked(psi0.cavity_dim(), psi0.atom_dim(), amps)?;
            visit(i, samples[i], &current)?;
        }
        Ok(())
    }
}

/// `exp(-i T dt) e_0` for the symmetric tridiagonal `T = tridiag(betas, alphas, betas)`.
fn tridiagonal_expm_e0(alphas: &[f64], betas: &[f64], dt: f64) -> Result<Vec<C64>> {
    let m = alphas.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
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
    let (lam, q) = linalg::symmetric_eigen(t.as_ref())?;
    Ok((0..m)
        .map(|i| (0..m).map(|k| C64::from_polar(q[(i, k)] * q[(0, k)], -lam[k] * dt)).sum())
        .collect())
}

/// Krylov propagation storing every sample. `dt` is the largest internal step.
pub fn propagate_krylov(h: &Operator, psi0: &JointState, grid: &TimeGrid, krylov_dim: usize, dt: f64) -> Result<StateTrajectory> {
    check_inputs(h, psi0)?;
    let prop = KrylovPropagator::new(h, krylov_dim)?;
    let mut states = Vec::with_capacity(grid.len());
    prop.evolve(psi0, grid, dt, &mut |_, _, s| {
        states.push(s.clone());
        Ok(())
    })?;
    Ok(StateTrajectory { grid: grid.clone(), states })
}

/// Integrator selection for streamed evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Krylov { max_dim: usize },
}

/// Streams the trajectory through `visit` without storing it.
pub fn evolve(method: Method, h: &Operator, psi0: &JointState, grid: &TimeGrid, visit: &mut Visitor<'_>) -> Result<()> {
    check_inputs(h, psi0)?;
    match method {
        Method::Spectral => SpectralPropagator::for_state(h, psi0)?.evolve(psi0, grid, visit),
        Method::Krylov { max_dim } => KrylovPropagator::new(h, max_dim)?.evolve(psi0, grid, grid.spacing(), visit),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{self, ChargerKind, ModelParams};

    fn setup(n: usize, n_max: usize, kind: ChargerKind) -> (Operator, JointState) {
        let p = ModelParams::default().with_atoms(n).with_charger(kind).with_n_max(Some(n_max));
        let cav = p.cavity_basis().unwrap();
        let atoms = p.atom_basis().unwrap();
        let h = model::build_hamiltonians(&p, &cav, &atoms).unwrap();
        (h.h, model::initial_joint_state_in(&p, &cav, &atoms).unwrap())
    }

    /// exp(-iHt) psi by Taylor series with scaling and squaring of the
    /// dense matrix; independent of both production integrators.
    fn taylor_oracle(h: &Operator, psi: &[C64], t: f64) -> Vec<C64> {
        let d = h.dim();
        let hd = h.to_dense();
        let norm1 = (0..d).map(|j| (0..d).map(|i| hd[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
        let squarings = ((norm1 * t.abs()).log2().ceil().max(0.0) as u32) + 4;
        let tau = t / 2f64.powi(squarings as i32);
        // exp(-i H tau) as a complex dense matrix
        let a = Mat::<C64>::from_fn(d, d, |i, j| C64::new(0.0, -tau * hd[(i, j)]));
        let mut term = Mat::<C64>::identity(d, d);
        let mut sum = Mat::<C64>::identity(d, d);
        for k in 1..30 {
            let prod = &term * &a;
            term = Mat::from_fn(d, d, |i, j| prod[(i, j)] / k as f64);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        (0..d).map(|i| (0..d).map(|j| sum[(i, j)] * psi[j]).sum()).collect()
    }

    #[test]
    fn grid_layout() {
        let g = TimeGrid::default();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.samples()[0], 0.0);
        assert_eq!(*g.samples().last().unwrap(), 20.0);
        assert!(g.samples().windows(2).all(|w| w[1] > w[0]));
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
    }

    #[test]
    fn spectral_matches_taylor_oracle() {
        let (h, _) = setup(1, 4, ChargerKind::Fock);
        let d = h.dim();
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[0] = C64::new(0.6, 0.0);
        amps[2 * 3] = C64::new(0.0, 0.8);
        let psi0 = JointState::new(5, 3, amps).unwrap();
        let grid = TimeGrid::new(3.0, 7).unwrap();
        let traj = propagate_spectral(&h, &psi0, &grid).unwrap();
        for (t, s) in grid.samples().iter().zip(&traj.states) {
            let expect = taylor_oracle(&h, psi0.amplitudes(), *t);
            assert!(linalg::distance(s.amplitudes(), &expect) < 1e-9, "t = {t}");
        }
        assert_eq!(traj.states[0].amplitudes(), psi0.amplitudes());
    }

    #[test]
    fn spectral_splits_into_parity_sectors() {
        let (h, _) = setup(2, 9, ChargerKind::Fock);
        let prop = SpectralPropagator::new(&h).unwrap();
        assert_eq!(prop.block_sizes(), vec![30, 30]);
    }

    #[test]
    fn state_restricted_propagator_skips_idle_sectors() {
        let (h, psi0) = setup(2, 12, ChargerKind::Fock);
        let full = SpectralPropagator::new(&h).unwrap();
        let lean = SpectralPropagator::for_state(&h, &psi0).unwrap();
        assert_eq!(lean.block_sizes().len(), 1);
        let a = full.state_at(&psi0, 1.7).unwrap();
        let b = lean.state_at(&psi0, 1.7).unwrap();
        assert!(linalg::distance(a.amplitudes(), b.amplitudes()) < 1e-10);
        let mut other = vec![C64::new(0.0, 0.0); h.dim()];
        other[1] = C64::new(1.0, 0.0);
        let other = JointState::new(psi0.cavity_dim(), psi0.atom_dim(), other).unwrap();
        assert!(lean.state_at(&other, 1.0).is_err());
    }

    #[test]
    fn krylov_agrees_with_spectral_and_conserves() {
        let (h, psi0) = setup(2, 16, ChargerKind::Fock);
        let grid = TimeGrid::new(5.0, 101).unwrap();
        let a = propagate_spectral(&h, &psi0, &grid).unwrap();
        let b = propagate_krylov(&h, &psi0, &grid, 30, grid.spacing()).unwrap();
        let e0 = h.expectation(psi0.amplitudes()).re;
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(linalg::distance(x.amplitudes(), y.amplitudes()) < 1e-9);
            assert!((x.norm() - 1.0).abs() < 1e-10 && (y.norm() - 1.0).abs() < 1e-10);
            let e = h.expectation(y.amplitudes()).re;
            assert!((e - e0).abs() / e0 < 1e-8);
        }
        assert_eq!(b.states[0].amplitudes(), psi0.amplitudes());
    }

    #[test]
    fn time_reversal_returns_initial_state() {
        let (h, psi0) = setup(2, 20, ChargerKind::Fock);
        let prop = SpectralPropagator::new(&h).unwrap();
        let fwd = prop.state_at(&psi0, 2.5).unwrap();
        let back = prop.state_at(&fwd, -2.5).unwrap();
        assert!(linalg::distance(back.amplitudes(), psi0.amplitudes()) < 1e-8);
        let k = KrylovPropagator::new(&h, 30).unwrap();
        let fwd = k.step(psi0.amplitudes(), 2.5).unwrap();
        let back = k.step(&fwd, -2.5).unwrap();
        assert!(linalg::distance(&back, psi0.amplitudes()) < 1e-8);
    }

    #[test]
    fn krylov_subdivides_large_steps() {
        let (h, psi0) = setup(2, 20, ChargerKind::Fock);
        let k = KrylovPropagator::new(&h, 6).unwrap();
        let a = k.step(psi0.amplitudes(), 1.0).unwrap();
        let b = SpectralPropagator::new(&h).unwrap().state_at(&psi0, 1.0).unwrap();
        assert!(linalg::distance(&a, b.amplitudes()) < 1e-9);
        assert!(KrylovPropagator::new(&h, 3).is_err());
    }

    #[test]
    fn krylov_gives_up_when_it_cannot_converge() {
        let (h, psi0) = setup(2, 20, ChargerKind::Fock);
        let k = KrylovPropagator { h: h.matrix(), max_dim: 4, tol: 1e-300, max_halvings: 2 };
        assert!(matches!(k.step(psi0.amplitudes(), 1.0), Err(Error::Integration(_))));
    }
}
