// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Energetic and entropic figures of merit of the battery, pointwise in time
//! and reduced over a trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, DensityMatrix, JointState, Operator, Subsystem};
use crate::linalg;

/// Eigenvalues of `rho_B` below this are treated as an invalid state.
pub const NEGATIVE_POPULATION_TOL: f64 = 1e-8;
/// Eigenvalues within this of 0 or 1 do not contribute to the entropy; both
/// ends are round-off of a pure reduced state.
pub const ENTROPY_CUTOFF: f64 = 1e-14;
/// Stored energy below which the ergotropy ratio is reported as 0.
pub const EMPTY_BATTERY: f64 = 1e-12;

/// `Tr[H_B rho_B]`.
pub fn stored_energy(rho_b: &DensityMatrix, h_b_atomic: &Operator) -> Result<f64> {
    Ok(rho_b.expectation(h_b_atomic)?.re)
}

/// Ergotropy and locked (passive-state) energy of `rho_B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ergotropy {
    pub ergotropy: f64,
    pub locked: f64,
}

/// Pairs the populations of `rho_B` (descending) with the levels of `H_B`
/// (ascending); the resulting energy is locked, the rest is extractable.
pub fn ergotropy(rho_b: &DensityMatrix, h_b_atomic: &Operator) -> Result<Ergotropy> {
    let levels = linalg::symmetric_eigenvalues(h_b_atomic.to_dense().as_ref())?;
    ergotropy_with_levels(rho_b, h_b_atomic, &levels)
}

fn ergotropy_with_levels(rho_b: &DensityMatrix, h_b_atomic: &Operator, levels: &[f64]) -> Result<Ergotropy> {
    let populations = rho_b.eigenvalues()?;
    Ok(ergotropy_from_spectra(stored_energy(rho_b, h_b_atomic)?, &populations, levels)?.0)
}

/// Returns the ergotropy split plus the populations in descending order.
fn ergotropy_from_spectra(energy: f64, populations_ascending: &[f64], levels_ascending: &[f64]) -> Result<(Ergotropy, Vec<f64>)> {
    if let Some(&min) = populations_ascending.first() {
        if min < -NEGATIVE_POPULATION_TOL {
            return Err(Error::InvalidState(format!("reduced state has eigenvalue {min:e}")));
        }
    }
    let descending: Vec<f64> = populations_ascending.iter().rev().copied().collect();
    let locked: f64 = descending.iter().zip(levels_ascending).map(|(r, e)| r * e).sum();
    let ergotropy = (energy - locked).max(0.0);
    Ok((Ergotropy { ergotropy, locked }, descending))
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_of_spectrum(&rho.eigenvalues()?))
}

pub fn entropy_of_spectrum(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > ENTROPY_CUTOFF && x < 1.0 - ENTROPY_CUTOFF).map(|&x| -x * x.log2()).sum::<f64>().max(0.0)
}

/// Every scalar figure of merit at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub stored_energy: f64,
    pub ergotropy: f64,
    pub locked_energy: f64,
    /// `E_B / t`, 0 at `t = 0`.
    pub storing_power: f64,
    /// `ergotropy / t`, 0 at `t = 0`.
    pub ergotropy_power: f64,
    /// Battery-charger entanglement in bits.
    pub entropy: f64,
    /// `ergotropy / E_B`, 0 for an empty battery.
    pub ratio: f64,
}

/// Computes [`ObservableRecord`]s with the battery spectrum cached.
#[derive(Clone, Debug)]
pub struct RecordEvaluator {
    h_b_atomic: Operator,
    levels: Vec<f64>,
}

impl RecordEvaluator {
    pub fn new(h_b_atomic: &Operator) -> Result<Self> {
        let levels = linalg::symmetric_eigenvalues(h_b_atomic.to_dense().as_ref())?;
        Ok(Self { h_b_atomic: h_b_atomic.clone(), levels })
    }

    pub fn record(&self, t: f64, state: &JointState) -> Result<ObservableRecord> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("record time {t} must be non-negative")));
        }
        let rho_b = hilbert::partial_trace(state, Subsystem::Atoms)?;
        let energy = stored_energy(&rho_b, &self.h_b_atomic)?;
        let spectrum = rho_b.eigenvalues()?;
        let (split, _) = ergotropy_from_spectra(energy, &spectrum, &self.levels)?;
        let entropy = entropy_of_spectrum(&spectrum);
        let (storing_power, ergotropy_power) = if t > 0.0 { (energy / t, split.ergotropy / t) } else { (0.0, 0.0) };
        let ratio = if energy > EMPTY_BATTERY { split.ergotropy / energy } else { 0.0 };
        Ok(ObservableRecord {
            t,
            stored_energy: energy,
            ergotropy: split.ergotropy,
            locked_energy: split.locked,
            storing_power,
            ergotropy_power,
            entropy,
            ratio,
        })
    }
}

pub fn record(t: f64, state: &JointState, h_b_atomic: &Operator) -> Result<ObservableRecord> {
    RecordEvaluator::new(h_b_atomic)?.record(t, state)
}

/// Maxima over a trajectory and the derived entanglements and ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub e_max: f64,
    pub t_e: f64,
    pub ergo_max: f64,
    pub t_ergo: f64,
    pub p_max: f64,
    pub t_p: f64,
    pub pergo_max: f64,
    pub t_pergo: f64,
    pub s_at_te: f64,
    pub s_at_tp: f64,
    pub r_e: f64,
    pub r_p: f64,
}

#[derive(Clone, Copy, Debug)]
struct Peak {
    value: f64,
    t: f64,
    entropy: f64,
    index: usize,
}

impl Peak {
    fn offer(slot: &mut Option<Peak>, value: f64, rec: &ObservableRecord, index: usize) {
        // strict comparison keeps the earliest sample on ties
        if slot.map_or(true, |p| value > p.value) {
            *slot = Some(Peak { value, t: rec.t, entropy: rec.entropy, index });
        }
    }
}

/// Streaming maxima; `finish` equals [`summarize`] on the same records.
#[derive(Clone, Debug, Default)]
pub struct SummaryBuilder {
    count: usize,
    energy: Option<Peak>,
    ergo: Option<Peak>,
    power: Option<Peak>,
    ergo_power: Option<Peak>,
}

impl SummaryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rec: &ObservableRecord) {
        let i = self.count;
        Peak::offer(&mut self.energy, rec.stored_energy, rec, i);
        Peak::offer(&mut self.ergo, rec.ergotropy, rec, i);
        Peak::offer(&mut self.power, rec.storing_power, rec, i);
        Peak::offer(&mut self.ergo_power, rec.ergotropy_power, rec, i);
        self.count += 1;
    }

    /// Sample index of the stored-energy maximum so far.
    pub fn energy_peak_index(&self) -> Option<usize> {
        self.energy.map(|p| p.index)
    }

    pub fn finish(&self) -> Result<TrajectorySummary> {
        let (Some(e), Some(g), Some(p), Some(q)) = (self.energy, self.ergo, self.power, self.ergo_power) else {
            return Err(Error::EmptyTrajectory);
        };
        let ratio = |num: f64, den: f64| if den > EMPTY_BATTERY { num / den } else { 0.0 };
        Ok(TrajectorySummary {
            e_max: e.value,
            t_e: e.t,
            ergo_max: g.value,
            t_ergo: g.t,
            p_max: p.value,
            t_p: p.t,
            pergo_max: q.value,
            t_pergo: q.t,
            s_at_te: e.entropy,
            s_at_tp: p.entropy,
            r_e: ratio(g.value, e.value),
            r_p: ratio(q.value, p.value),
        })
    }
}

pub fn summarize(records: &[ObservableRecord]) -> Result<TrajectorySummary> {
    let mut b = SummaryBuilder::new();
    records.iter().for_each(|r| b.push(r));
    b.finish()
}

/// Fits a parabola through the grid maximum of `values` and its neighbours
/// and returns the refined `(t, value)`; falls back to the grid point at the
/// boundaries or when the three points are not concave.
pub fn quadratic_peak(times: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.map_or(true, |b| v > values[b]) {
            best = Some(i);
        }
    }
    let i = best?;
    if i == 0 || i + 1 == values.len() {
        return Some((times[i], values[i]));
    }
    let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    if curvature >= 0.0 {
        return Some((times[i], y1));
    }
    let h = 0.5 * (times[i + 1] - times[i - 1]);
    let shift = 0.5 * (y0 - y2) / curvature;
    Some((times[i] + shift * h, y1 - 0.25 * (y0 - y2) * shift))
}

/// Pearson correlation coefficient; `None` if either series is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::BasisTag;
    use crate::linalg::CsrMatrix;
    use crate::C64;
    use faer::Mat;

    fn diag_rho(p: &[f64]) -> DensityMatrix {
        let n = p.len();
        DensityMatrix::new(BasisTag::Atom { dim: n }, Mat::from_fn(n, n, |i, j| if i == j { C64::new(p[i], 0.0) } else { C64::new(0.0, 0.0) })).unwrap()
    }

    fn diag_op(e: &[f64]) -> Operator {
        Operator::new(BasisTag::Atom { dim: e.len() }, CsrMatrix::diagonal(e)).unwrap()
    }

    /// min over permutations of the populations against the levels.
    fn brute_force_locked(p: &[f64], e: &[f64]) -> f64 {
        fn permute(rest: &mut Vec<f64>, chosen: &mut Vec<f64>, e: &[f64], best: &mut f64) {
            if rest.is_empty() {
                *best = best.min(chosen.iter().zip(e).map(|(a, b)| a * b).sum());
                return;
            }
            for i in 0..rest.len() {
                let x = rest.remove(i);
                chosen.push(x);
                permute(rest, chosen, e, best);
                chosen.pop();
                rest.insert(i, x);
            }
        }
        let mut best = f64::INFINITY;
        permute(&mut p.to_vec(), &mut Vec::new(), e, &mut best);
        best
    }

    #[test]
    fn two_level_active_state() {
        // 0.3 on the ground level, 0.7 on the excited level
        let rho = diag_rho(&[0.3, 0.7]);
        let h = diag_op(&[0.0, 1.0]);
        assert!((stored_energy(&rho, &h).unwrap() - 0.7).abs() < 1e-15);
        let e = ergotropy(&rho, &h).unwrap();
        let oracle = brute_force_locked(&[0.3, 0.7], &[0.0, 1.0]);
        assert!((oracle - 0.3).abs() < 1e-15);
        assert!((e.locked - oracle).abs() < 1e-14);
        assert!((e.ergotropy - 0.4).abs() < 1e-14);
    }

    #[test]
    fn passive_state_has_no_ergotropy() {
        let rho = diag_rho(&[0.5, 0.3, 0.2]);
        let h = diag_op(&[0.0, 1.0, 1.95]);
        assert!(ergotropy(&rho, &h).unwrap().ergotropy.abs() < 1e-15);
    }

    #[test]
    fn pure_state_ergotropy_is_full_energy() {
        let psi = [C64::new(0.6, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.8)];
        let rho = DensityMatrix::pure(BasisTag::Atom { dim: 3 }, &psi).unwrap();
        let h = diag_op(&[0.0, 1.0, 1.95]);
        let e = ergotropy(&rho, &h).unwrap();
        assert!((e.ergotropy - 0.64 * 1.95).abs() < 1e-12);
        assert!(e.locked.abs() < 1e-12);
    }

    #[test]
    fn ergotropy_matches_permutation_oracle_with_degeneracies() {
        // degenerate levels and populations, diagonal in a shuffled order
        let p = [0.1, 0.25, 0.25, 0.05, 0.35];
        let e = [1.0, 0.0, 1.0, 2.0, 1.0];
        let rho = diag_rho(&p);
        let h = diag_op(&e);
        let mut levels = e.to_vec();
        levels.sort_by(f64::total_cmp);
        let got = ergotropy(&rho, &h).unwrap();
        assert!((got.locked - brute_force_locked(&p, &levels)).abs() < 1e-9);
    }

    #[test]
    fn negative_population_is_invalid() {
        let n = 2;
        let m = Mat::from_fn(n, n, |i, j| if i == j { C64::new(if i == 0 { 1.1 } else { -0.1 }, 0.0) } else { C64::new(0.0, 0.0) });
        let rho = DensityMatrix::from_matrix_unchecked(BasisTag::Atom { dim: 2 }, m).unwrap();
        assert!(matches!(ergotropy(&rho, &diag_op(&[0.0, 1.0])), Err(Error::InvalidState(_))));
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&diag_rho(&[1.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(entropy_of_spectrum(&[1e-16, 1.0 - 1e-16]), 0.0);
        assert!((entropy(&diag_rho(&[0.25; 4])).unwrap() - 2.0).abs() < 1e-14);
        assert!((entropy(&diag_rho(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-14);
    }

    fn rec(t: f64, e: f64) -> ObservableRecord {
        ObservableRecord {
            t,
            stored_energy: e,
            ergotropy: e / 2.0,
            locked_energy: e / 2.0,
            storing_power: if t > 0.0 { e / t } else { 0.0 },
            ergotropy_power: if t > 0.0 { e / 2.0 / t } else { 0.0 },
            entropy: t,
            ratio: 0.5,
        }
    }

    #[test]
    fn summary_tie_breaks_to_earliest_sample() {
        let recs: Vec<_> = (0..5).map(|i| rec(i as f64, 1.0)).collect();
        let s = summarize(&recs).unwrap();
        assert_eq!(s.t_e, 0.0);
        assert_eq!(s.t_p, 1.0);
    }

    #[test]
    fn summary_finds_single_peak() {
        let recs: Vec<_> = [0.0, 1.0, 3.0, 2.0, 0.5].iter().enumerate().map(|(i, &e)| rec(i as f64, e)).collect();
        let s = summarize(&recs).unwrap();
        assert_eq!((s.e_max, s.t_e, s.s_at_te), (3.0, 2.0, 2.0));
        assert_eq!((s.ergo_max, s.t_ergo), (1.5, 2.0));
        assert!((s.r_e - 0.5).abs() < 1e-15);
        assert!((s.r_p - 0.5).abs() < 1e-15);
        assert!(matches!(summarize(&[]), Err(Error::EmptyTrajectory)));
    }

    #[test]
    fn quadratic_refinement_recovers_parabola_vertex() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|x| 2.0 - (x - 0.43) * (x - 0.43)).collect();
        let (tp, vp) = quadratic_peak(&t, &v).unwrap();
        assert!((tp - 0.43).abs() < 1e-12 && (vp - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_basic() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &[2.0, 4.0, 6.0, 8.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&x, &[1.0; 4]).is_none());
    }
}
