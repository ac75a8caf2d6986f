// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use dicke_qb::hilbert::AtomBasis;

fn digits(mut index: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for slot in d.iter_mut() {
        *slot = index % 3;
        index /= 3;
    }
    d
}

fn index(d: &[usize]) -> usize {
    d.iter().rev().fold(0, |acc, &x| acc * 3 + x)
}

/// Normalized symmetric product-space vector for each occupation triple.
fn symmetric_states(n: usize, basis: &AtomBasis) -> Vec<Vec<f64>> {
    let full = 3usize.pow(n as u32);
    basis
        .configs()
        .iter()
        .map(|cfg| {
            let mut v = vec![0.0; full];
            for (k, slot) in v.iter_mut().enumerate() {
                let d = digits(k, n);
                let counts = [0, 1, 2].map(|lvl| d.iter().filter(|&&x| x == lvl).count());
                if counts == [cfg.occupation(1), cfg.occupation(2), cfg.occupation(3)] {
                    *slot = 1.0;
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            v
        })
        .collect()
}

/// `<S_r| sum_k |i><j|_k |S_c>` on the full product space.
pub fn brute_force_collective(n: usize, i: usize, j: usize, basis: &AtomBasis) -> Vec<Vec<f64>> {
    let sym = symmetric_states(n, basis);
    let full = 3usize.pow(n as u32);
    let apply = |v: &[f64]| {
        let mut out = vec![0.0; full];
        for (k, &amp) in v.iter().enumerate() {
            if amp == 0.0 {
                continue;
            }
            let d = digits(k, n);
            for atom in 0..n {
                if d[atom] == j - 1 {
                    let mut e = d.clone();
                    e[atom] = i - 1;
                    out[index(&e)] += amp;
                }
            }
        }
        out
    };
    let images: Vec<Vec<f64>> = sym.iter().map(|s| apply(s)).collect();
    sym.iter()
        .map(|row| images.iter().map(|col| row.iter().zip(col).map(|(a, b)| a * b).sum()).collect())
        .collect()
}

/// Pearson correlation coefficient, computed directly.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
