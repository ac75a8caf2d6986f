// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated cavity Fock space, the permutation-symmetric sector of N
//! three-level atoms, collective operators, tensor products and partial
//! traces.
//!
//! Atoms are represented by occupation triples `(n1, n2, n3)` with
//! `n1 + n2 + n3 = N`; a collective operator `A_ij = sum_k |i_k><j_k|`
//! restricted to this sector is the bosonic bilinear `b_i^dag b_j`.
//! Joint vectors are cavity-major: index `n * atom_dim + c`.

use faer::{Accum, Mat, MatRef, Par};

use crate::error::{Error, Result};
use crate::linalg::{self, CsrMatrix};
use crate::C64;

/// Photon-number basis `|0>, ..., |n_max>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CavityBasis {
    n_max: usize,
}

impl CavityBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter("photon cutoff n_max must be at least 1".into()));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// Occupations of levels |1>, |2>, |3>.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomConfig {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl AtomConfig {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Self {
        Self { n1, n2, n3 }
    }

    pub fn total(&self) -> usize {
        self.n1 + self.n2 + self.n3
    }

    /// Occupation of level `level` (1-based).
    pub fn occupation(&self, level: usize) -> usize {
        match level {
            1 => self.n1,
            2 => self.n2,
            3 => self.n3,
            _ => panic!("level {level} outside 1..=3"),
        }
    }

    fn with_occupation(mut self, level: usize, value: usize) -> Self {
        match level {
            1 => self.n1 = value,
            2 => self.n2 = value,
            3 => self.n3 = value,
            _ => unreachable!(),
        }
        self
    }
}

/// The symmetric N-atom sector. Configurations are ordered with `n1`
/// descending, then `n2` descending, so `(N, 0, 0)` (all atoms in |1>) is
/// index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomBasis {
    n_atoms: usize,
    configs: Vec<AtomConfig>,
}

impl AtomBasis {
    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[AtomConfig] {
        &self.configs
    }

    pub fn config(&self, index: usize) -> AtomConfig {
        self.configs[index]
    }

    /// Closed-form position of `c` in the ordering, or `None` if `c` is not
    /// an N-atom configuration.
    pub fn index_of(&self, c: AtomConfig) -> Option<usize> {
        if c.total() != self.n_atoms {
            return None;
        }
        let above = self.n_atoms - c.n1;
        Some(above * (above + 1) / 2 + (above - c.n2))
    }
}

/// All `(n1, n2, n3)` with `n1 + n2 + n3 = N`; `(N+1)(N+2)/2` of them.
pub fn enumerate_atom_basis(n_atoms: usize) -> Result<AtomBasis> {
    if n_atoms == 0 {
        return Err(Error::InvalidParameter("atom count N must be at least 1".into()));
    }
    let mut configs = Vec::with_capacity((n_atoms + 1) * (n_atoms + 2) / 2);
    for n1 in (0..=n_atoms).rev() {
        for n2 in (0..=n_atoms - n1).rev() {
            configs.push(AtomConfig::new(n1, n2, n_atoms - n1 - n2));
        }
    }
    Ok(AtomBasis { n_atoms, configs })
}

/// Which space an operator or density matrix acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisTag {
    Cavity { dim: usize },
    Atom { dim: usize },
    Joint { cavity: usize, atom: usize },
}

impl BasisTag {
    pub fn dim(&self) -> usize {
        match *self {
            BasisTag::Cavity { dim } | BasisTag::Atom { dim } => dim,
            BasisTag::Joint { cavity, atom } => cavity * atom,
        }
    }
}

/// A real sparse operator tagged with the basis it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    tag: BasisTag,
    matrix: CsrMatrix,
}

impl Operator {
    pub fn new(tag: BasisTag, matrix: CsrMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != tag.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cannot act on {:?}",
                matrix.nrows(),
                matrix.ncols(),
                tag
            )));
        }
        Ok(Self { tag, matrix })
    }

    pub fn identity(tag: BasisTag) -> Self {
        Self { tag, matrix: CsrMatrix::identity(tag.dim()) }
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn adjoint(&self) -> Self {
        Self { tag: self.tag, matrix: self.matrix.transpose() }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.matrix.is_symmetric(tol)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.tag != other.tag {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.tag, other.tag)));
        }
        Ok(())
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { tag: self.tag, matrix: self.matrix.lin_comb(a, &other.matrix, b) })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { tag: self.tag, matrix: self.matrix.scale(s) }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { tag: self.tag, matrix: self.matrix.matmul(&other.matrix) })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.lin_comb(1.0, &other.compose(self)?, -1.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.matrix.max_abs_diff(&other.matrix))
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.matrix.mul_vec(x)
    }

    /// `<psi|self|psi>` for a vector on this operator's basis.
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        linalg::inner(psi, &self.apply(psi))
    }

    pub fn to_dense(&self) -> Mat<f64> {
        self.matrix.to_dense()
    }
}

/// `A_ij` on the symmetric sector; levels are 1-based.
pub fn collective_op(i: usize, j: usize, basis: &AtomBasis) -> Result<Operator> {
    for level in [i, j] {
        if !(1..=3).contains(&level) {
            return Err(Error::InvalidParameter(format!("level index {level} outside {{1, 2, 3}}")));
        }
    }
    let mut trips = Vec::new();
    for (col, &c) in basis.configs().iter().enumerate() {
        if i == j {
            let n = c.occupation(i);
            if n > 0 {
                trips.push((col, col, n as f64));
            }
            continue;
        }
        let nj = c.occupation(j);
        if nj == 0 {
            continue;
        }
        let ni = c.occupation(i);
        let target = c.with_occupation(j, nj - 1).with_occupation(i, ni + 1);
        let row = basis.index_of(target).expect("b_i^dag b_j preserves N");
        trips.push((row, col, ((ni + 1) as f64 * nj as f64).sqrt()));
    }
    let d = basis.dim();
    Operator::new(BasisTag::Atom { dim: d }, CsrMatrix::from_triplets(d, d, trips))
}

/// Photon annihilation operator; the creator is its adjoint.
pub fn annihilator(basis: &CavityBasis) -> Operator {
    let d = basis.dim();
    let trips = (1..d).map(|n| (n - 1, n, (n as f64).sqrt())).collect();
    Operator { tag: BasisTag::Cavity { dim: d }, matrix: CsrMatrix::from_triplets(d, d, trips) }
}

pub fn number_op(basis: &CavityBasis) -> Operator {
    let d = basis.dim();
    Operator {
        tag: BasisTag::Cavity { dim: d },
        matrix: CsrMatrix::diagonal(&(0..d).map(|n| n as f64).collect::<Vec<_>>()),
    }
}

/// `cavity_op ⊗ atom_op` on the cavity-major joint basis.
pub fn tensor(cavity_op: &Operator, atom_op: &Operator) -> Result<Operator> {
    match (cavity_op.tag, atom_op.tag) {
        (BasisTag::Cavity { dim: c }, BasisTag::Atom { dim: a }) => Ok(Operator {
            tag: BasisTag::Joint { cavity: c, atom: a },
            matrix: cavity_op.matrix.kron(&atom_op.matrix),
        }),
        (l, r) => Err(Error::DimensionMismatch(format!("tensor expects (cavity, atom) operands, got ({l:?}, {r:?})"))),
    }
}

/// Normalized state on the joint cavity ⊗ atom basis.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    cavity_dim: usize,
    atom_dim: usize,
    amplitudes: Vec<C64>,
}

impl JointState {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(cavity_dim: usize, atom_dim: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::unchecked(cavity_dim, atom_dim, amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::StaleState { norm });
        }
        Ok(state)
    }

    /// Shape-checked but not norm-checked; used for intermediate propagation results.
    pub fn unchecked(cavity_dim: usize, atom_dim: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != cavity_dim * atom_dim {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a {cavity_dim}x{atom_dim} joint basis",
                amplitudes.len()
            )));
        }
        Ok(Self { cavity_dim, atom_dim, amplitudes })
    }

    /// `cavity ⊗ atom`, renormalized.
    pub fn product(cavity: &[C64], atom: &[C64]) -> Result<Self> {
        let mut amps = Vec::with_capacity(cavity.len() * atom.len());
        for c in cavity {
            amps.extend(atom.iter().map(|a| c * a));
        }
        let n = linalg::norm(&amps);
        if n == 0.0 {
            return Err(Error::InvalidState("product of zero vectors".into()));
        }
        amps.iter_mut().for_each(|z| *z /= n);
        Self::new(cavity.len(), atom.len(), amps)
    }

    pub fn cavity_dim(&self) -> usize {
        self.cavity_dim
    }

    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, photon: usize, atom: usize) -> C64 {
        self.amplitudes[photon * self.atom_dim + atom]
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    /// Amplitudes as a `cavity_dim x atom_dim` matrix.
    pub fn as_matrix(&self) -> MatRef<'_, C64> {
        MatRef::from_row_major_slice(&self.amplitudes, self.cavity_dim, self.atom_dim)
    }

    /// Probability in the `levels` highest photon numbers.
    pub fn top_fock_population(&self, levels: usize) -> f64 {
        let start = self.cavity_dim.saturating_sub(levels) * self.atom_dim;
        self.amplitudes[start..].iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix on a single subsystem.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    tag: BasisTag,
    matrix: Mat<C64>,
}

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const NEGATIVITY_TOL: f64 = 1e-10;
    pub const HERMITICITY_TOL: f64 = 1e-12;

    /// Validates trace, Hermiticity and positivity.
    pub fn new(tag: BasisTag, matrix: Mat<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(tag, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    pub fn from_matrix_unchecked(tag: BasisTag, matrix: Mat<C64>) -> Result<Self> {
        if matrix.nrows() != tag.dim() || matrix.ncols() != tag.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} density matrix on {:?}",
                matrix.nrows(),
                matrix.ncols(),
                tag
            )));
        }
        Ok(Self { tag, matrix })
    }

    /// `|psi><psi|` for a normalized vector.
    pub fn pure(tag: BasisTag, psi: &[C64]) -> Result<Self> {
        let n = psi.len();
        let m = Mat::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        Self::new(tag, m)
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("density matrix trace {tr}")));
        }
        let defect = linalg::hermiticity_defect(self.matrix.as_ref());
        if defect > Self::HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("density matrix Hermiticity defect {defect:e}")));
        }
        let min = self.eigenvalues()?.first().copied().unwrap_or(0.0);
        if min < -Self::NEGATIVITY_TOL {
            return Err(Error::InvalidState(format!("density matrix eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(self.matrix.as_ref())
    }

    /// `Tr[rho O]` for a real operator on the same basis.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.tag() != self.tag {
            return Err(Error::DimensionMismatch(format!("{:?} operator on {:?} state", op.tag(), self.tag)));
        }
        let mut acc = C64::new(0.0, 0.0);
        for (i, j, v) in op.matrix().triplets() {
            acc += self.matrix[(j, i)] * v;
        }
        Ok(acc)
    }
}

/// Subsystem retained by a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    Atoms,
    Cavity,
}

/// Reduced state of a pure joint state: `rho_B` for [`Subsystem::Atoms`],
/// `rho_A` for [`Subsystem::Cavity`].
pub fn partial_trace(state: &JointState, keep: Subsystem) -> Result<DensityMatrix> {
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::StaleState { norm });
    }
    let psi = state.as_matrix();
    let (tag, m) = match keep {
        Subsystem::Atoms => {
            // rho_B[c, c'] = sum_n psi[n, c] conj(psi[n, c'])
            let d = state.atom_dim();
            let mut m = Mat::<C64>::zeros(d, d);
            faer::linalg::matmul::matmul(m.as_mut(), Accum::Replace, psi.transpose(), psi.conjugate(), C64::new(1.0, 0.0), Par::Seq);
            (BasisTag::Atom { dim: d }, m)
        }
        Subsystem::Cavity => {
            let d = state.cavity_dim();
            let mut m = Mat::<C64>::zeros(d, d);
            faer::linalg::matmul::matmul(m.as_mut(), Accum::Replace, psi, psi.adjoint(), C64::new(1.0, 0.0), Par::Seq);
            (BasisTag::Cavity { dim: d }, m)
        }
    };
    let mut m = m;
    symmetrize(&mut m);
    DensityMatrix::from_matrix_unchecked(tag, m)
}

/// Replaces `m` by `(m + m^H) / 2`, removing round-off asymmetry.
pub(crate) fn symmetrize(m: &mut Mat<C64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)] = C64::new(m[(j, j)].re, 0.0);
        for i in (j + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}
