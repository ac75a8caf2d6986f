// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Versioned CSV tables and their JSON sidecars.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::Result;

use super::config::ExperimentConfig;

pub const SCHEMA: &str = "dicke-qb/1";

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Makes free text safe for a CSV cell.
pub fn cell_text(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = format!("#schema={SCHEMA}\n{}\n", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Metadata written next to every CSV as `<stem>.json`.
#[derive(Clone, Debug)]
pub struct Sidecar {
    pub n_max: Value,
    pub leakage: Value,
    pub method: Value,
    pub invariants: Map<String, Value>,
    pub warnings: Vec<String>,
    pub extra: Map<String, Value>,
}

impl Default for Sidecar {
    fn default() -> Self {
        Self {
            n_max: Value::Null,
            leakage: Value::Null,
            method: Value::Null,
            invariants: Map::new(),
            warnings: Vec::new(),
            extra: Map::new(),
        }
    }
}

impl Sidecar {
    pub fn flag(&mut self, name: &str, ok: bool) {
        self.invariants.insert(name.to_string(), Value::Bool(ok));
    }
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json`, returning both paths.
pub fn write_table(dir: &Path, stem: &str, table: &Table, config: &ExperimentConfig, meta: &Sidecar) -> Result<Vec<PathBuf>> {
    let csv = dir.join(format!("{stem}.csv"));
    let side = dir.join(format!("{stem}.json"));
    std::fs::write(&csv, table.render())?;
    let doc = json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "mode": config.mode.name(),
        "file": format!("{stem}.csv"),
        "rows": table.rows.len(),
        "config": config,
        "config_sha256": config.hash(),
        "n_max": meta.n_max,
        "leakage": meta.leakage,
        "method": meta.method,
        "invariants": meta.invariants,
        "warnings": meta.warnings,
        "details": meta.extra,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    std::fs::write(&side, text)?;
    Ok(vec![csv, side])
}
