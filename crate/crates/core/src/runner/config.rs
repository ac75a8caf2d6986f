// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: a JSON document whose every field is optional,
//! overlaid with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::groundstate::CouplingRange;
use crate::model::{ChargerKind, ModelParams};
use crate::phasespace::PhaseGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Evolve,
    SweepCoupling,
    SweepN,
    Ground,
    Wigner,
    Photons,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Evolve => "evolve",
            Mode::SweepCoupling => "sweep-coupling",
            Mode::SweepN => "sweep-n",
            Mode::Ground => "ground",
            Mode::Wigner => "wigner",
            Mode::Photons => "photons",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown mode '{s}'")))
    }
}

/// Integrator choice; `auto` picks by the size of the largest block of `H`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    #[default]
    Auto,
    Spectral,
    Krylov,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "spectral" => Ok(Self::Spectral),
            "krylov" => Ok(Self::Krylov),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Photon cutoff: `"auto"` or an explicit level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Cutoff {
    #[default]
    Auto,
    Fixed(usize),
}

impl Cutoff {
    pub fn as_option(&self) -> Option<usize> {
        match self {
            Cutoff::Auto => None,
            Cutoff::Fixed(n) => Some(*n),
        }
    }
}

impl std::str::FromStr for Cutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Cutoff::Auto);
        }
        s.parse().map(Cutoff::Fixed).map_err(|_| Error::Config(format!("n_max must be 'auto' or an integer, got '{s}'")))
    }
}

impl Serialize for Cutoff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cutoff::Auto => s.serialize_str("auto"),
            Cutoff::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Cutoff {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(Cutoff::Fixed(n)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Everything a run needs. Unset fields take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n_atoms: usize,
    pub omega_c: f64,
    pub omega: [f64; 3],
    pub g12: f64,
    pub g23: f64,
    /// Restricts the run to one charger; all three otherwise.
    pub charger: Option<ChargerKind>,
    pub n_max: Cutoff,
    pub t_end: f64,
    pub samples: usize,
    pub method: MethodChoice,
    pub krylov_dim: usize,
    /// Coupling plane of `sweep-coupling`.
    pub g12_range: CouplingRange,
    pub g23_range: CouplingRange,
    /// Inclusive atom-number range of `sweep-n`.
    pub n_range: [usize; 2],
    /// `ground`: `g12` line scanned at each of `ground_g23`, plus the diagonal.
    pub ground_g12: CouplingRange,
    pub ground_g23: Vec<f64>,
    /// Coupling points `(g12, g23)` of `wigner` and `photons`.
    pub probe_points: Vec<[f64; 2]>,
    pub phase_grid: PhaseGrid,
    pub out: PathBuf,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        let plane = CouplingRange { start: 0.0, end: 2.0, points: 41 };
        Self {
            mode: Mode::Evolve,
            n_atoms: p.n_atoms,
            omega_c: p.omega_c,
            omega: p.omega,
            g12: p.g12,
            g23: p.g23,
            charger: None,
            n_max: Cutoff::Auto,
            t_end: 20.0,
            samples: 2001,
            method: MethodChoice::Auto,
            krylov_dim: 40,
            g12_range: plane,
            g23_range: plane,
            n_range: [1, 10],
            ground_g12: plane,
            ground_g23: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            probe_points: vec![[0.2, 0.2], [0.5, 0.5], [0.8, 0.8]],
            phase_grid: PhaseGrid::default(),
            out: PathBuf::from("out"),
            workers: 1,
        }
    }
}

/// Command-line values that replace file values when present.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub n_atoms: Option<usize>,
    pub g12: Option<f64>,
    pub g23: Option<f64>,
    pub charger: Option<ChargerKind>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub n_max: Option<Cutoff>,
    pub method: Option<MethodChoice>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        set!(n_atoms, g12, g23, t_end, samples, n_max, method, out, workers);
        if o.charger.is_some() {
            self.charger = o.charger;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model(ChargerKind::Fock).validate()?;
        self.grid()?;
        self.g12_range.validate()?;
        self.g23_range.validate()?;
        self.ground_g12.validate()?;
        self.phase_grid.validate()?;
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.krylov_dim < 4 {
            return Err(Error::Config("krylov_dim must be at least 4".into()));
        }
        if self.n_range[0] == 0 || self.n_range[1] < self.n_range[0] {
            return Err(Error::Config(format!("n_range {:?} must be a non-empty range of positive integers", self.n_range)));
        }
        if self.ground_g23.is_empty() || self.probe_points.is_empty() {
            return Err(Error::Config("ground_g23 and probe_points must be non-empty".into()));
        }
        if self.ground_g23.iter().chain(self.probe_points.iter().flatten()).any(|g| !g.is_finite()) {
            return Err(Error::Config("coupling values must be finite".into()));
        }
        Ok(())
    }

    pub fn model(&self, charger: ChargerKind) -> ModelParams {
        ModelParams {
            n_atoms: self.n_atoms,
            omega_c: self.omega_c,
            omega: self.omega,
            g12: self.g12,
            g23: self.g23,
            n_max: self.n_max.as_option(),
            charger,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_end, self.samples)
    }

    pub fn chargers(&self) -> Vec<ChargerKind> {
        match self.charger {
            Some(k) => vec![k],
            None => ChargerKind::ALL.to_vec(),
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
