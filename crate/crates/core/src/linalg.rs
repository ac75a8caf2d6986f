// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Small linear-algebra layer: a real CSR matrix acting on complex vectors,
//! plus thin wrappers around faer's dense Hermitian eigensolvers.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::traits::ComplexField;
use faer::diag::Diag;
use faer::{Mat, MatRef, Par};

use crate::error::{Error, Result};
use crate::C64;

/// Real sparse matrix in compressed-sparse-row layout.
///
/// Every operator of the model is real in the occupation basis, so complex
/// arithmetic only ever enters through the vectors the matrix acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and entries that cancel to exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), indices.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            values.push(v);
        }
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_idx = Vec::with_capacity(rows.len());
        let mut keep_val = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(values) {
            if v != 0.0 {
                keep_rows.push(r);
                keep_idx.push(c);
                keep_val.push(v);
            }
        }
        for &r in &keep_rows {
            indptr[r + 1] += 1;
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self { nrows, ncols, indptr, indices: keep_idx, values: keep_val }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Iterates the stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.prune()
    }

    fn prune(self) -> Self {
        if self.values.iter().all(|&v| v != 0.0) {
            self
        } else {
            Self::from_triplets(self.nrows, self.ncols, self.triplets().collect())
        }
    }

    /// `a * self + b * other`; shapes must agree.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let trips = self
            .triplets()
            .map(|(i, j, v)| (i, j, a * v))
            .chain(other.triplets().map(|(i, j, v)| (i, j, b * v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, trips)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut trips = Vec::new();
        for i in 0..self.nrows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    trips.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.nrows, other.ncols, trips)
    }

    /// Kronecker product with `self` as the outer (slow) index.
    pub fn kron(&self, other: &Self) -> Self {
        let (m, n) = (other.nrows, other.ncols);
        let mut trips = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.triplets() {
            for (k, l, b) in other.triplets() {
                trips.push((i * m + k, j * n + l, a * b));
            }
        }
        Self::from_triplets(self.nrows * m, self.ncols * n, trips)
    }

    /// `y = self * x`.
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += x[self.indices[k]] * self.values[k];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Dense principal submatrix on the given (sorted or unsorted) index set.
    pub fn principal_block(&self, idx: &[usize]) -> Mat<f64> {
        let mut pos = vec![usize::MAX; self.ncols];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = Mat::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (j, v) in self.row(i) {
                let b = pos[j];
                if b != usize::MAX {
                    m[(a, b)] = v;
                }
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.lin_comb(1.0, other, -1.0).values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.transpose()) <= tol
    }

    /// Partitions `0..n` into the connected components of the sparsity graph
    /// of a square matrix. Components are sorted by their smallest index and
    /// each component's indices are ascending.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        assert!(self.is_square());
        let n = self.nrows;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, j, _) in self.triplets() {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                parent[hi] = lo;
            }
        }
        let mut slot = vec![usize::MAX; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = comps.len();
                comps.push(Vec::new());
            }
            comps[slot[r]].push(i);
        }
        comps
    }
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<x|y>` with the first argument conjugated.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn distance(x: &[C64], y: &[C64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// Dense Hermitian eigensolve pinned to sequential execution, so results do
/// not depend on the size of the surrounding thread pool.
fn self_adjoint_evd<T: ComplexField>(m: MatRef<'_, T>, vectors: bool, what: &str) -> Result<(Diag<T>, Option<Mat<T>>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{what} of a {}x{} matrix", n, m.ncols())));
    }
    let compute = if vectors { ComputeEigenvectors::Yes } else { ComputeEigenvectors::No };
    let mut s = Diag::<T>::zeros(n);
    let mut u = vectors.then(|| Mat::<T>::zeros(n, n));
    let mut mem = MemBuffer::new(evd::self_adjoint_evd_scratch::<T>(n, compute, Par::Seq, Default::default()));
    evd::self_adjoint_evd(m, s.as_mut(), u.as_mut().map(|u| u.as_mut()), Par::Seq, MemStack::new(&mut mem), Default::default())
        .map_err(|e| Error::Numerical(format!("{what} of {n}x{n} failed: {e:?}")))?;
    Ok((s, u))
}

/// Real symmetric eigendecomposition `(eigenvalues ascending, eigenvectors as columns)`.
pub fn symmetric_eigen(m: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let (s, u) = self_adjoint_evd(m, true, "symmetric eigendecomposition")?;
    Ok((s.column_vector().iter().copied().collect(), u.expect("vectors requested")))
}

pub fn symmetric_eigenvalues(m: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let (s, _) = self_adjoint_evd(m, false, "symmetric eigenvalues")?;
    Ok(s.column_vector().iter().copied().collect())
}

/// Eigenvalues (ascending) of a Hermitian complex matrix.
pub fn hermitian_eigenvalues(m: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let (s, _) = self_adjoint_evd(m, false, "Hermitian eigenvalues")?;
    Ok(s.column_vector().iter().map(|z| z.re).collect())
}

pub fn hermitian_eigen(m: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let (s, u) = self_adjoint_evd(m, true, "Hermitian eigendecomposition")?;
    Ok((s.column_vector().iter().map(|z| z.re).collect(), u.expect("vectors requested")))
}

/// Largest elementwise `|m - m^H|`.
pub fn hermiticity_defect(m: MatRef<'_, C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, 1.0), (1, 0, -1.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn kron_matches_index_arithmetic() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let b = CsrMatrix::from_triplets(3, 3, vec![(0, 2, 5.0), (1, 1, 7.0), (2, 0, 11.0)]);
        let k = a.kron(&b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..3 {
                    for q in 0..3 {
                        assert_eq!(k.get(i * 3 + p, j * 3 + q), a.get(i, j) * b.get(p, q));
                    }
                }
            }
        }
    }

    #[test]
    fn components_split_block_diagonal() {
        let m = CsrMatrix::from_triplets(4, 4, vec![(0, 2, 1.0), (2, 0, 1.0), (1, 1, 1.0), (3, 3, 2.0)]);
        assert_eq!(m.connected_components(), vec![vec![0, 2], vec![1], vec![3]]);
    }

    #[test]
    fn matvec_agrees_with_dense() {
        let m = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (0, 2, -2.0), (2, 1, 4.0)]);
        let x = vec![C64::new(1.0, 1.0), C64::new(0.5, 0.0), C64::new(0.0, -1.0)];
        let y = m.mul_vec(&x);
        let d = m.to_dense();
        for i in 0..3 {
            let expect: C64 = (0..3).map(|j| x[j] * d[(i, j)]).sum();
            assert!((y[i] - expect).norm() < 1e-15);
        }
    }
}
