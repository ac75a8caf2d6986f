// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("stale state: norm {norm} deviates from 1")]
    StaleState { norm: f64 },

    #[error("truncation error at n_max = {n_max}: leakage {leakage:e} exceeds tolerance")]
    Truncation { n_max: usize, leakage: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("integration error: {0}")]
    Integration(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
