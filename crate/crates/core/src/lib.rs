// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! Decoherence-free couplings between giant atoms in a one-dimensional
//! waveguide, simulated as a cascaded collision model.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: dense complex operators on small multipartite spaces.
//! * [`topology`]: coupling-point layouts, phases and the DF condition.
//! * [`effective`]: collective operators, averaged interaction, the
//!   second-order Hamiltonian and the closed-form coupling matrix.
//! * [`collision`]: subcollision generators, cascaded and simultaneous
//!   collision unitaries, time-bin streaming.
//! * [`circuit`]: the mediator gate circuit (XY gates plus phase kicks).
//! * [`dispersive`]: the far-detuned multimode contrast model.
//! * [`format`]: plain-text layout/config grammar and CSV writers.
//! * [`verify`]: the bundled invariant suite used by `giantdf verify`.
//!
//! Conventions used throughout: single-atom basis index 0 is `|g⟩` and 1 is
//! `|e⟩`, `σ = |g⟩⟨e|`, `σ_z = |e⟩⟨e| − |g⟩⟨g|`. Joint spaces are ordered
//! atoms (atom 0 leftmost) ⊗ right-going bin ⊗ left-going bin.

pub mod circuit;
pub mod collision;
pub mod dispersive;
pub mod effective;
pub mod error;
pub mod format;
pub mod tensor;
pub mod tolerance;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
