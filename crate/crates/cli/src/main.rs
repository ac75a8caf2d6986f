// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: `dicke-qb <mode> [--config file] [overrides]`.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use dicke_qb::runner::{self, Cutoff, ExperimentConfig, MethodChoice, Mode, Overrides};
use dicke_qb::ChargerKind;

#[derive(Debug, Parser)]
#[command(name = "dicke-qb", version, about = "Three-level Dicke quantum battery simulator")]
struct Cli {
    /// evolve | sweep-coupling | sweep-n | ground | wigner | photons
    mode: Mode,
    /// JSON configuration file; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of atoms.
    #[arg(long = "N")]
    n_atoms: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    g12: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g23: Option<f64>,
    /// fock | coherent | squeezed (default: all three)
    #[arg(long)]
    charger: Option<ChargerKind>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Photon cutoff: `auto` or an integer.
    #[arg(long)]
    nmax: Option<Cutoff>,
    /// auto | spectral | krylov
    #[arg(long)]
    method: Option<MethodChoice>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Cli {
    fn config(&self) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let overrides = Overrides {
            n_atoms: self.n_atoms,
            g12: self.g12,
            g23: self.g23,
            charger: self.charger,
            t_end: self.t_end,
            samples: self.samples,
            n_max: self.nmax,
            method: self.method,
            out: self.out.clone(),
            workers: self.workers,
        };
        Ok(ExperimentConfig { mode: self.mode, ..base.apply(&overrides) })
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = cli.config()?;
    let report = runner::run(&config).with_context(|| format!("{} failed", config.mode.name()))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dicke-qb: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
