// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment orchestration. Every mode expands its configuration into
//! independent tasks, evaluates them on a worker pool of the configured
//! size, and writes results in task order, so output never depends on
//! scheduling.

pub mod config;
pub mod output;
pub mod simulate;

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groundstate::{GroundStateSolver, PhasePoint, DENSE_LIMIT};
use crate::model::ChargerKind;
use crate::observables::TrajectorySummary;
use crate::phasespace;

pub use config::{Cutoff, ExperimentConfig, MethodChoice, Mode, Overrides};
use output::{cell_text, num, Sidecar, Table};
pub use simulate::{simulate, SimOptions, TrajectoryRun};

/// Files written and non-fatal accuracy warnings.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl RunReport {
    fn absorb(&mut self, files: Vec<PathBuf>, meta: &Sidecar) {
        self.files.extend(files);
        self.warnings.extend(meta.warnings.iter().cloned());
    }
}

/// Validates `config`, then runs its mode on a pool of `config.workers` threads.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    std::fs::create_dir_all(&config.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| match config.mode {
        Mode::Evolve => run_evolve(config),
        Mode::SweepCoupling => run_sweep_coupling(config),
        Mode::SweepN => run_sweep_n(config),
        Mode::Ground => run_ground(config),
        Mode::Wigner => run_wigner(config, true),
        Mode::Photons => run_wigner(config, false),
    })
}

fn sim_options(config: &ExperimentConfig, keep_records: bool, keep_cavity_at_peak: bool) -> SimOptions {
    SimOptions { method: config.method, krylov_dim: config.krylov_dim, keep_records, keep_cavity_at_peak }
}

fn run_meta(run: &TrajectoryRun) -> Sidecar {
    let mut meta = Sidecar {
        n_max: json!(run.n_max),
        leakage: json!(run.leakage),
        method: json!(run.method),
        ..Default::default()
    };
    let flags = serde_json::to_value(run.invariants).expect("flags serialize");
    if let Value::Object(map) = flags {
        meta.invariants = map;
    }
    for name in run.invariants.failures() {
        meta.warnings.push(format!("{} charger: invariant {name} violated", run.params.charger));
    }
    meta.extra.insert("cutoff_growths".into(), json!(run.cutoff_growths));
    meta.extra.insert("summary".into(), serde_json::to_value(run.summary).expect("summary serializes"));
    meta
}

/// Time traces, one table per charger. Any failure aborts the run.
pub fn run_evolve(config: &ExperimentConfig) -> Result<RunReport> {
    let grid = config.grid()?;
    let opts = sim_options(config, true, false);
    let kinds = config.chargers();
    let runs: Vec<Result<TrajectoryRun>> = kinds.par_iter().map(|&k| simulate(&config.model(k), &grid, &opts)).collect();
    let mut report = RunReport::default();
    for (kind, run) in kinds.iter().zip(runs) {
        let run = run.map_err(|e| annotate(e, &format!("evolve {kind}")))?;
        let mut table = Table::new(&["t", "E_B", "ergotropy", "E_locked", "P_B", "P_ergo", "S", "R"]);
        for r in &run.records {
            table.push(
                [r.t, r.stored_energy, r.ergotropy, r.locked_energy, r.storing_power, r.ergotropy_power, r.entropy, r.ratio]
                    .map(num)
                    .to_vec(),
            );
        }
        let meta = run_meta(&run);
        let files = output::write_table(&config.out, &format!("evolve_{kind}"), &table, config, &meta)?;
        report.absorb(files, &meta);
    }
    Ok(report)
}

fn annotate(e: Error, context: &str) -> Error {
    match e {
        Error::Truncation { .. } | Error::Integration(_) | Error::Numerical(_) => e,
        other => Error::Config(format!("{context}: {other}")),
    }
}

const SUMMARY_COLUMNS: [&str; 12] =
    ["E_max", "t_E", "ergo_max", "t_ergo", "P_max", "t_P", "Pergo_max", "t_Pergo", "S_at_tE", "S_at_tP", "R_e", "R_p"];

fn summary_cells(s: Option<&TrajectorySummary>) -> Vec<String> {
    match s {
        Some(s) => [s.e_max, s.t_e, s.ergo_max, s.t_ergo, s.p_max, s.t_p, s.pergo_max, s.t_pergo, s.s_at_te, s.s_at_tp, s.r_e, s.r_p]
            .map(num)
            .to_vec(),
        None => vec![num(f64::NAN); SUMMARY_COLUMNS.len()],
    }
}

/// Axis columns of a sweep plus the parameters of each task.
struct SweepTask {
    axis: Vec<String>,
    params: crate::model::ModelParams,
}

fn sweep_table(config: &ExperimentConfig, axis: &[&'static str], tasks: Vec<SweepTask>, stem: &str) -> Result<RunReport> {
    let grid = config.grid()?;
    let opts = sim_options(config, false, false);
    let results: Vec<Result<TrajectoryRun>> = tasks.par_iter().map(|t| simulate(&t.params, &grid, &opts)).collect();
    let mut header = axis.to_vec();
    header.extend(["charger", "n_max", "method"]);
    header.extend(SUMMARY_COLUMNS);
    header.extend(["invariants_ok", "error"]);
    let mut table = Table::new(&header);
    let mut meta = Sidecar::default();
    let (mut failures, mut worst_leak, mut max_n) = (0usize, 0.0f64, 0usize);
    let mut all_ok = true;
    for (task, res) in tasks.iter().zip(&results) {
        let mut row = task.axis.clone();
        row.push(task.params.charger.to_string());
        match res {
            Ok(run) => {
                row.extend([run.n_max.to_string(), run.method.to_string()]);
                row.extend(summary_cells(Some(&run.summary)));
                row.extend([run.invariants.all().to_string(), String::new()]);
                worst_leak = worst_leak.max(run.leakage);
                max_n = max_n.max(run.n_max);
                all_ok &= run.invariants.all();
            }
            Err(e) => {
                failures += 1;
                row.extend([String::new(), String::new()]);
                row.extend(summary_cells(None));
                row.extend(["false".to_string(), cell_text(&e.to_string())]);
            }
        }
        table.push(row);
    }
    meta.n_max = json!(max_n);
    meta.leakage = json!(worst_leak);
    meta.method = json!(config.method);
    meta.flag("all_points_succeeded", failures == 0);
    meta.flag("invariants_held", all_ok);
    let r_in_range = results.iter().flatten().all(|r| (0.0..=1.0).contains(&r.summary.r_e) && (0.0..=1.0).contains(&r.summary.r_p));
    meta.flag("ratios_in_unit_interval", r_in_range);
    if failures > 0 {
        meta.warnings.push(format!("{stem}: {failures} of {} points failed; see the error column", tasks.len()));
    }
    let mut report = RunReport::default();
    let files = output::write_table(&config.out, stem, &table, config, &meta)?;
    report.absorb(files, &meta);
    Ok(report)
}

/// Charging figures of merit over the `(g12, g23)` plane.
pub fn run_sweep_coupling(config: &ExperimentConfig) -> Result<RunReport> {
    let mut tasks = Vec::new();
    for g12 in config.g12_range.values() {
        for g23 in config.g23_range.values() {
            for kind in config.chargers() {
                let mut params = config.model(kind);
                params.g12 = g12;
                params.g23 = g23;
                tasks.push(SweepTask { axis: vec![num(g12), num(g23)], params });
            }
        }
    }
    sweep_table(config, &["g12", "g23"], tasks, "sweep_coupling")
}

/// Charging figures of merit against the number of atoms.
pub fn run_sweep_n(config: &ExperimentConfig) -> Result<RunReport> {
    let mut tasks = Vec::new();
    for n in config.n_range[0]..=config.n_range[1] {
        for kind in config.chargers() {
            tasks.push(SweepTask { axis: vec![n.to_string()], params: config.model(kind).with_atoms(n) });
        }
    }
    sweep_table(config, &["N"], tasks, "sweep_n")
}

/// `true` when consecutive second differences never exceed `tol`.
pub fn is_concave(values: &[f64], tol: f64) -> bool {
    values.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] <= tol)
}

/// Ground energies along `g12` lines at fixed `g23`, and along the diagonal.
pub fn run_ground(config: &ExperimentConfig) -> Result<RunReport> {
    let solver = GroundStateSolver::new(&config.model(ChargerKind::Fock))?;
    let g12s = config.ground_g12.values();
    let mut report = RunReport::default();
    let lines: Vec<(f64, f64)> = config.ground_g23.iter().flat_map(|&b| g12s.iter().map(move |&a| (a, b))).collect();
    let diagonal: Vec<(f64, f64)> = g12s.iter().map(|&g| (g, g)).collect();
    for (stem, points, line_len) in [("ground_lines", lines, g12s.len()), ("ground_diagonal", diagonal, g12s.len())] {
        let results: Vec<Result<PhasePoint>> = points.par_iter().map(|&(a, b)| solver.solve(a, b)).collect();
        let mut table = Table::new(&["g12", "g23", "E_g", "phase", "n_max", "error"]);
        let mut meta = Sidecar::default();
        let mut failures = 0;
        for (&(a, b), res) in points.iter().zip(&results) {
            match res {
                Ok(p) => table.push(vec![num(a), num(b), num(p.e_g), p.phase.name().into(), p.n_max.to_string(), String::new()]),
                Err(e) => {
                    failures += 1;
                    table.push(vec![num(a), num(b), num(f64::NAN), String::new(), String::new(), cell_text(&e.to_string())]);
                }
            }
        }
        let energies: Vec<f64> = results.iter().map(|r| r.as_ref().map_or(f64::NAN, |p| p.e_g)).collect();
        let ok: Vec<&PhasePoint> = results.iter().flatten().collect();
        meta.flag("all_points_succeeded", failures == 0);
        meta.flag("variational_bound", ok.iter().all(|p| p.e_g <= 1e-9));
        meta.flag(
            "zero_coupling_exact",
            ok.iter().filter(|p| p.g12 == 0.0 && p.g23 == 0.0).all(|p| p.e_g == 0.0),
        );
        meta.flag("concave_along_lines", energies.chunks(line_len).all(|line| is_concave(line, 1e-8)));
        meta.n_max = json!(ok.iter().map(|p| p.n_max).max());
        meta.method = json!(format!("dense below {DENSE_LIMIT} states, Lanczos above"));
        if failures > 0 {
            meta.warnings.push(format!("{stem}: {failures} of {} points failed", points.len()));
        }
        let files = output::write_table(&config.out, stem, &table, config, &meta)?;
        report.absorb(files, &meta);
    }
    Ok(report)
}

fn point_tag(g12: f64, g23: f64) -> String {
    format!("g12-{}_g23-{}", num(g12), num(g23))
}

/// Cavity state at maximum stored energy for each probe point and charger:
/// photon statistics, plus the Wigner map when `with_wigner`.
pub fn run_wigner(config: &ExperimentConfig, with_wigner: bool) -> Result<RunReport> {
    let grid = config.grid()?;
    let opts = sim_options(config, false, true);
    let mut tasks = Vec::new();
    for &[g12, g23] in &config.probe_points {
        for kind in config.chargers() {
            let mut params = config.model(kind);
            params.g12 = g12;
            params.g23 = g23;
            tasks.push(params);
        }
    }
    let runs: Vec<Result<TrajectoryRun>> = tasks.par_iter().map(|p| simulate(p, &grid, &opts)).collect();
    let mut report = RunReport::default();
    for (params, run) in tasks.iter().zip(runs) {
        let run = run.map_err(|e| annotate(e, &format!("{} charger at ({}, {})", params.charger, params.g12, params.g23)))?;
        let rho = run.cavity_at_peak.as_ref().expect("cavity state requested");
        let tag = format!("{}_{}", params.charger, point_tag(params.g12, params.g23));
        let mut meta = run_meta(&run);
        meta.extra.insert("t_E".into(), json!(run.summary.t_e));

        let dist = phasespace::photon_distribution(rho)?;
        let mut table = Table::new(&["n", "p"]);
        for (n, p) in dist.probabilities.iter().enumerate() {
            table.push(vec![n.to_string(), num(*p)]);
        }
        let mut pmeta = meta.clone();
        pmeta.flag("normalized", (dist.total() - 1.0).abs() <= 1e-8);
        pmeta.extra.insert("odd_mass".into(), json!(dist.odd_mass()));
        pmeta.extra.insert("mean_photons".into(), json!(dist.mean()));
        let files = output::write_table(&config.out, &format!("photons_{tag}"), &table, config, &pmeta)?;
        report.absorb(files, &pmeta);

        if with_wigner {
            let map = phasespace::wigner(rho, &config.phase_grid)?;
            let mut table = Table::new(&["x", "p", "W"]);
            for (alpha, w) in config.phase_grid.points().into_iter().zip(&map.values) {
                table.push(vec![num(alpha.re), num(alpha.im), num(*w)]);
            }
            let mut wmeta = meta;
            let sum = map.riemann_sum();
            wmeta.flag("grid_covers_state", map.warning().is_none());
            wmeta.flag("normalized", map.warning().is_some() || (sum - 1.0).abs() <= 1e-3);
            wmeta.extra.insert("riemann_sum".into(), json!(sum));
            wmeta.extra.insert("min_W".into(), json!(map.min()));
            if let Some(w) = map.warning() {
                wmeta.warnings.push(format!("{tag}: {w}"));
            }
            let files = output::write_table(&config.out, &format!("wigner_{tag}"), &table, config, &wmeta)?;
            report.absorb(files, &wmeta);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concavity_check() {
        assert!(is_concave(&[0.0, 0.0, -1.0, -3.0], 1e-12));
        assert!(!is_concave(&[0.0, -1.0, 0.0], 1e-12));
    }

    #[test]
    fn point_tags_are_stable() {
        assert_eq!(point_tag(0.2, 0.5), "g12-0.2_g23-0.5");
    }
}
