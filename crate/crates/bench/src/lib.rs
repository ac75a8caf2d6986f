// Copyright 2026 The dicke-qb Authors
// SPDX-License-Identifier: Apache-2.0

//! Benchmarks live in `benches/`.
