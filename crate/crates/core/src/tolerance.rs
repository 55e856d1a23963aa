// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerical tolerances shared by the library, the CLI and the test suites.

/// Entrywise Hermiticity and other exact structural identities.
pub const STRUCTURAL: f64 = 1e-12;

/// `‖U†U − 𝟙‖_max` for unitary-tagged matrices.
pub const UNITARY: f64 = 1e-10;

/// Trace and positivity slack for density matrices.
pub const DENSITY: f64 = 1e-10;

/// Default slack for the per-atom DF residual `|Σ_ℓ e^{−iφ_jℓ}|`.
pub const DF_DEFAULT: f64 = 1e-9;

/// Coupling-matrix identities (closed form, chiral split, decoupling).
pub const COUPLING: f64 = 1e-13;

/// Trace preservation along a streamed trajectory.
pub const TRAJECTORY_TRACE: f64 = 1e-9;

/// Default cap on any Hilbert-space dimension built by the library.
pub const MAX_DIM: usize = 4096;

/// Above this value of `γ·dt` the coarse-graining regime is considered violated.
pub const COARSE_GRAIN_WARN: f64 = 0.1;

/// Largest `γ·dt` accepted by the braided circuit compiler without override.
pub const CIRCUIT_MAX_GAMMA_DT: f64 = 0.25;

/// Ratio `min|Δ| / max|g|` required by the dispersive regime flag.
pub const DISPERSIVE_RATIO: f64 = 20.0;
