// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Phase-space views of the cavity state: Wigner function, symmetrically
//! ordered characteristic function and Fock-basis photon statistics.
//!
//! Phase-space points are `alpha = x + i p`, so a coherent state `|alpha0>`
//! has its Wigner peak at `alpha0` and `W` integrates to one over `dx dp`.

use std::f64::consts::PI;

use faer::{Accum, Mat, Par};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{BasisTag, DensityMatrix};
use crate::linalg;
use crate::C64;

/// Boundary `|W|` above which a map is flagged as cropping the state.
pub const BOUNDARY_TOL: f64 = 1e-3;
/// Top-level population of a displaced state above which `chi` is flagged.
pub const DISPLACEMENT_LEAKAGE_TOL: f64 = 1e-6;
const LEAKAGE_LEVELS: usize = 3;

/// Rectangular grid of phase-space points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self { x_min: -7.0, x_max: 7.0, p_min: -7.0, p_max: 7.0, nx: 201, np: 201 }
    }
}

impl PhaseGrid {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64, nx: usize, np: usize) -> Result<Self> {
        let g = Self { x_min, x_max, p_min, p_max, nx, np };
        g.validate()?;
        Ok(g)
    }

    /// Square grid `[-half_width, half_width]^2`.
    pub fn square(half_width: f64, points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, points, points)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max].iter().all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.p_max <= self.p_min {
            return Err(Error::InvalidParameter(format!("malformed phase grid extents {self:?}")));
        }
        if self.nx < 2 || self.np < 2 {
            return Err(Error::InvalidParameter("phase grid needs at least 2 points per axis".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        axis(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        axis(self.p_min, self.p_max, self.np)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in storage order: `p` outer, `x` inner.
    pub fn points(&self) -> Vec<C64> {
        let xs = self.xs();
        self.ps().into_iter().flat_map(|p| xs.iter().map(move |&x| C64::new(x, p))).collect()
    }

    fn on_boundary(&self, k: usize) -> bool {
        let (ip, ix) = (k / self.nx, k % self.nx);
        ix == 0 || ip == 0 || ix + 1 == self.nx || ip + 1 == self.np
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + i as f64 * h }).collect()
}

/// Wigner function sampled on a [`PhaseGrid`], stored `p`-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerMap {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
}

impl WignerMap {
    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.grid.nx + ix]
    }

    /// `sum W dx dp`; close to one when the grid covers the state.
    pub fn riemann_sum(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dp()
    }

    /// Largest `|W|` on the grid edge.
    pub fn boundary_max(&self) -> f64 {
        (0..self.values.len())
            .filter(|&k| self.grid.on_boundary(k))
            .map(|k| self.values[k].abs())
            .fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Accuracy warning when the grid crops the state.
    pub fn warning(&self) -> Option<String> {
        let b = self.boundary_max();
        (b > BOUNDARY_TOL).then(|| format!("Wigner grid crops the state: boundary |W| = {b:.3e} > {BOUNDARY_TOL:e}"))
    }
}

/// Fock-basis photon statistics `p(n) = <n|rho|n>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    pub probabilities: Vec<f64>,
}

impl PhotonDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn odd_mass(&self) -> f64 {
        self.probabilities.iter().skip(1).step_by(2).sum()
    }
}

fn require_cavity(rho: &DensityMatrix) -> Result<()> {
    match rho.tag() {
        BasisTag::Cavity { .. } => Ok(()),
        other => Err(Error::DimensionMismatch(format!("expected a cavity state, got {other:?}"))),
    }
}

/// `p(n)`, with round-off negatives clamped to zero.
pub fn photon_distribution(rho: &DensityMatrix) -> Result<PhotonDistribution> {
    require_cavity(rho)?;
    let probabilities = (0..rho.dim()).map(|n| rho.get(n, n).re.max(0.0)).collect();
    Ok(PhotonDistribution { probabilities })
}

/// Last Fock index carrying population, plus one. Positivity bounds every
/// coherence by the diagonal, so rows beyond it do not contribute.
fn support(rho: &DensityMatrix) -> usize {
    (0..rho.dim()).rev().find(|&n| rho.get(n, n).re > 1e-300).map_or(1, |n| n + 1)
}

/// Wigner function by the displaced-parity formula
/// `W(alpha) = (2/pi) Tr[D(alpha)^H rho D(alpha) P]`, evaluated in closed form
/// through the Laguerre recurrence of the displaced-parity matrix elements.
pub fn wigner(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<WignerMap> {
    require_cavity(rho)?;
    grid.validate()?;
    let m = support(rho);
    // upper triangle of the trimmed state, row-major
    let mut upper = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in i..m {
            upper[i * m + j] = rho.get(i, j);
        }
    }
    let sqrt: Vec<f64> = (0..m).map(|n| (n as f64).sqrt()).collect();
    let values = grid.points().par_iter().map(|&a| wigner_point(&upper, m, &sqrt, a)).collect();
    Ok(WignerMap { grid: *grid, values })
}

/// Single-point Wigner value; see [`wigner`].
pub fn wigner_at(rho: &DensityMatrix, alpha: C64) -> Result<f64> {
    require_cavity(rho)?;
    let m = support(rho);
    let mut upper = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in i..m {
            upper[i * m + j] = rho.get(i, j);
        }
    }
    let sqrt: Vec<f64> = (0..m).map(|n| (n as f64).sqrt()).collect();
    Ok(wigner_point(&upper, m, &sqrt, alpha))
}

fn wigner_point(rho: &[C64], m: usize, sqrt: &[f64], a: C64) -> f64 {
    let zero = C64::new(0.0, 0.0);
    let mut wl = vec![zero; m];
    wl[0] = C64::new((-2.0 * a.norm_sqr()).exp() / PI, 0.0);
    let mut w = rho[0].re * wl[0].re;
    for n in 1..m {
        wl[n] = a * wl[n - 1] * (2.0 / sqrt[n]);
        w += 2.0 * (rho[n] * wl[n]).re;
    }
    for k in 1..m {
        let mut temp = wl[k];
        wl[k] = (a.conj() * temp * 2.0 - wl[k - 1] * sqrt[k]) / sqrt[k];
        w += (rho[k * m + k] * wl[k]).re;
        for n in (k + 1)..m {
            let next = (a * wl[n - 1] * 2.0 - temp * sqrt[k]) / sqrt[n];
            temp = wl[n];
            wl[n] = next;
            w += 2.0 * (rho[k * m + n] * wl[n]).re;
        }
    }
    2.0 * w
}

/// Eigendecomposition of the truncated quadrature `X = a + a^H`, which
/// yields every truncated displacement `D(eta) = exp(eta a^H - eta* a)`
/// exactly through `D = R U exp(-i|eta| X) U^H R^H` with the diagonal
/// phases `(R U)_nn = exp(i n arg eta) i^n`.
struct Quadrature {
    x: Vec<f64>,
    w: Mat<f64>,
}

impl Quadrature {
    fn new(dim: usize) -> Result<Self> {
        let t = Mat::<f64>::from_fn(dim, dim, |i, j| {
            if i + 1 == j {
                (j as f64).sqrt()
            } else if j + 1 == i {
                (i as f64).sqrt()
            } else {
                0.0
            }
        });
        let (x, w) = linalg::symmetric_eigen(t.as_ref())?;
        Ok(Self { x, w })
    }

    fn dim(&self) -> usize {
        self.x.len()
    }

    fn phases(&self, theta: f64) -> Vec<C64> {
        let i_pow = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
        (0..self.dim()).map(|n| C64::from_polar(1.0, theta * n as f64) * i_pow[n % 4]).collect()
    }

    /// `diag(W^T M W)` with `M = (RU)^H rho (RU)`, the eigenbasis weights
    /// of the rotated state.
    fn weights(&self, rho: faer::MatRef<'_, C64>, theta: f64) -> Vec<C64> {
        let d = self.dim();
        let u = self.phases(theta);
        let m = Mat::<C64>::from_fn(d, d, |i, j| u[i].conj() * rho[(i, j)] * u[j]);
        let wc = Mat::<C64>::from_fn(d, d, |i, j| C64::new(self.w[(i, j)], 0.0));
        let mut mw = Mat::<C64>::zeros(d, d);
        faer::linalg::matmul::matmul(mw.as_mut(), Accum::Replace, m.as_ref(), wc.as_ref(), C64::new(1.0, 0.0), Par::Seq);
        (0..d).map(|k| (0..d).map(|n| mw[(n, k)] * self.w[(n, k)]).sum()).collect()
    }

    /// Row `r` of the truncated `D(eta)`.
    fn displacement_row(&self, eta: C64, r: usize) -> Vec<C64> {
        let d = self.dim();
        let u = self.phases(eta.arg());
        let e: Vec<C64> = self.x.iter().map(|&x| C64::from_polar(1.0, -eta.norm() * x)).collect();
        (0..d)
            .map(|n| {
                let s: C64 = (0..d).map(|k| e[k] * (self.w[(r, k)] * self.w[(n, k)])).sum();
                u[r] * s * u[n].conj()
            })
            .collect()
    }

    fn displacement(&self, eta: C64) -> Mat<C64> {
        let d = self.dim();
        let rows: Vec<Vec<C64>> = (0..d).map(|r| self.displacement_row(eta, r)).collect();
        Mat::from_fn(d, d, |i, j| rows[i][j])
    }
}

/// Characteristic-function value with its truncation diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacteristicValue {
    pub value: C64,
    /// Population that `D(eta)` pushes into the top three Fock levels.
    pub leakage: f64,
}

impl CharacteristicValue {
    pub fn warning(&self) -> Option<String> {
        (self.leakage > DISPLACEMENT_LEAKAGE_TOL).then(|| {
            format!(
                "characteristic function affected by truncation: displaced population {:.3e} in the top Fock levels",
                self.leakage
            )
        })
    }
}

/// Reusable evaluator of `chi(eta) = Tr[rho exp(eta a^H - eta* a)]`.
pub struct CharacteristicFunction<'a> {
    rho: &'a DensityMatrix,
    quad: Quadrature,
}

impl<'a> CharacteristicFunction<'a> {
    pub fn new(rho: &'a DensityMatrix) -> Result<Self> {
        require_cavity(rho)?;
        Ok(Self { rho, quad: Quadrature::new(rho.dim())? })
    }

    pub fn eval(&self, eta: C64) -> Result<CharacteristicValue> {
        if !(eta.re.is_finite() && eta.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta = {eta} is not finite")));
        }
        let weights = self.quad.weights(self.rho.matrix(), eta.arg());
        let r = eta.norm();
        let value = weights.iter().zip(&self.quad.x).map(|(m, &x)| m * C64::from_polar(1.0, -r * x)).sum();
        let d = self.quad.dim();
        let mut leakage = 0.0;
        for row in d.saturating_sub(LEAKAGE_LEVELS)..d {
            let v = self.quad.displacement_row(eta, row);
            // v rho v^H
            for i in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..d {
                    acc += self.rho.get(i, j) * v[j].conj();
                }
                leakage += (v[i] * acc).re;
            }
        }
        Ok(CharacteristicValue { value, leakage: leakage.max(0.0) })
    }
}

/// One-off `chi(eta)`; prefer [`CharacteristicFunction`] for many points.
pub fn characteristic_function(rho: &DensityMatrix, eta: C64) -> Result<CharacteristicValue> {
    CharacteristicFunction::new(rho)?.eval(eta)
}

/// Truncated displacement operator `D(eta)` on `dim` Fock levels.
pub fn displacement_operator(dim: usize, eta: C64) -> Result<Mat<C64>> {
    Ok(Quadrature::new(dim)?.displacement(eta))
}

/// Quadrature settings for [`wigner_from_characteristic`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierOptions {
    /// Radius of the `eta` disk.
    pub radius: f64,
    /// Even number of Simpson intervals in `|eta|`.
    pub radial_intervals: usize,
    /// Trapezoid nodes in `arg eta`.
    pub angular_points: usize,
    /// Fock dimension the state is embedded in before displacing.
    pub padded_dim: usize,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self { radius: 9.0, radial_intervals: 600, angular_points: 192, padded_dim: 0 }
    }
}

/// `W(alpha) = pi^-2 int d^2eta exp(alpha eta* - alpha* eta) chi(eta)` by
/// direct quadrature on a disk. Slow; used to cross-check [`wigner`].
pub fn wigner_from_characteristic(rho: &DensityMatrix, alphas: &[C64], opts: &FourierOptions) -> Result<Vec<f64>> {
    require_cavity(rho)?;
    if opts.radial_intervals < 2 || opts.radial_intervals % 2 != 0 || opts.angular_points < 3 || !(opts.radius > 0.0) {
        return Err(Error::InvalidParameter(format!("bad Fourier options {opts:?}")));
    }
    let d0 = rho.dim();
    let d = opts.padded_dim.max(d0);
    let padded = Mat::<C64>::from_fn(d, d, |i, j| if i < d0 && j < d0 { rho.get(i, j) } else { C64::new(0.0, 0.0) });
    let quad = Quadrature::new(d)?;
    let nr = opts.radial_intervals;
    let h = opts.radius / nr as f64;
    let radial: Vec<(f64, f64)> = (0..=nr)
        .map(|i| {
            let simpson = if i == 0 || i == nr { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let r = i as f64 * h;
            (r, simpson * h / 3.0 * r)
        })
        .collect();
    let dtheta = 2.0 * PI / opts.angular_points as f64;
    // chi on the polar mesh, weighted by the quadrature and the measure
    let mut mesh: Vec<(C64, C64)> = Vec::with_capacity(opts.angular_points * radial.len());
    for j in 0..opts.angular_points {
        let theta = j as f64 * dtheta;
        let weights = quad.weights(padded.as_ref(), theta);
        for &(r, wr) in &radial {
            if wr == 0.0 {
                continue;
            }
            let chi: C64 = weights.iter().zip(&quad.x).map(|(m, &x)| m * C64::from_polar(1.0, -r * x)).sum();
            mesh.push((C64::from_polar(r, theta), chi * (wr * dtheta)));
        }
    }
    Ok(alphas
        .par_iter()
        .map(|&alpha| {
            let s: C64 = mesh.iter().map(|&(eta, c)| c * C64::from_polar(1.0, 2.0 * (alpha * eta.conj()).im)).sum();
            s.re / (PI * PI)
        })
        .collect())
}
