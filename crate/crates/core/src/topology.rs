// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! Coupling-point layouts of giant atoms along a waveguide.
//!
//! Only the coupling-point phases `φ_jℓ` and their left-to-right order
//! matter in the negligible-delay regime, so a [`Layout`] stores exactly
//! those, plus the right/left emission rates `γ` and `γ'`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingPoint {
    pub atom: usize,
    /// Index of this point among the atom's own points, left to right.
    pub leg: usize,
    /// Raw phase `k₀ x`, as given.
    pub phase: f64,
}

impl CouplingPoint {
    /// Phase reduced to `[0, 2π)`.
    pub fn reduced_phase(&self) -> f64 {
        self.phase.rem_euclid(TAU)
    }
}

/// Ordered coupling points (index `ν`, left to right) with emission rates.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    points: Vec<CouplingPoint>,
    n_atoms: usize,
    gamma_right: f64,
    gamma_left: f64,
}

impl Layout {
    /// Builds a layout from `(atom, phase)` pairs listed left to right.
    pub fn from_phases(points: &[(usize, f64)], gamma_right: f64, gamma_left: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Layout("layout has no coupling points".into()));
        }
        for (name, g) in [("gamma_right", gamma_right), ("gamma_left", gamma_left)] {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::Layout(format!("{name} must be finite and >= 0, got {g}")));
            }
        }
        if let Some((_, p)) = points.iter().find(|(_, p)| !p.is_finite()) {
            return Err(Error::Layout(format!("non-finite phase {p}")));
        }
        let n_atoms = points.iter().map(|&(a, _)| a).max().unwrap_or(0) + 1;
        let mut legs = vec![0usize; n_atoms];
        let points: Vec<CouplingPoint> = points
            .iter()
            .map(|&(atom, phase)| {
                let leg = legs[atom];
                legs[atom] += 1;
                CouplingPoint { atom, leg, phase }
            })
            .collect();
        if let Some(missing) = legs.iter().position(|&n| n == 0) {
            return Err(Error::Layout(format!(
                "atom {missing} has no coupling point (atom indices must be 0..{n_atoms} without gaps)"
            )));
        }
        Ok(Self { points, n_atoms, gamma_right, gamma_left })
    }

    /// Equally spaced points `φ_ν = ν·spacing` following the atom `pattern`.
    pub fn equally_spaced(pattern: &[usize], spacing: f64, gamma_right: f64, gamma_left: f64) -> Result<Self> {
        let pts: Vec<(usize, f64)> = pattern
            .iter()
            .enumerate()
            .map(|(nu, &a)| (a, nu as f64 * spacing))
            .collect();
        Self::from_phases(&pts, gamma_right, gamma_left)
    }

    pub fn points(&self) -> &[CouplingPoint] {
        &self.points
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn gamma_right(&self) -> f64 {
        self.gamma_right
    }

    pub fn gamma_left(&self) -> f64 {
        self.gamma_left
    }

    pub fn is_unidirectional(&self) -> bool {
        self.gamma_left == 0.0
    }

    /// Atom label of each point, in `ν` order.
    pub fn pattern(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.atom).collect()
    }

    /// `ν` indices of atom `j`'s points, in increasing order.
    pub fn atom_points(&self, j: usize) -> Vec<usize> {
        (0..self.points.len()).filter(|&nu| self.points[nu].atom == j).collect()
    }

    pub fn atom_phases(&self, j: usize) -> Vec<f64> {
        self.points.iter().filter(|p| p.atom == j).map(|p| p.phase).collect()
    }

    pub fn with_rates(&self, gamma_right: f64, gamma_left: f64) -> Result<Self> {
        let pts: Vec<(usize, f64)> = self.points.iter().map(|p| (p.atom, p.phase)).collect();
        Self::from_phases(&pts, gamma_right, gamma_left)
    }

    /// Adds `offsets[j]` to every phase of atom `j`.
    pub fn with_phase_offsets(&self, offsets: &[f64]) -> Result<Self> {
        if offsets.len() != self.n_atoms {
            return Err(Error::Layout(format!("{} offsets for {} atoms", offsets.len(), self.n_atoms)));
        }
        let pts: Vec<(usize, f64)> = self.points.iter().map(|p| (p.atom, p.phase + offsets[p.atom])).collect();
        Self::from_phases(&pts, self.gamma_right, self.gamma_left)
    }

    /// Renames atom `j` to `perm[j]`; phases and ordering are untouched.
    pub fn with_atoms_relabeled(&self, perm: &[usize]) -> Result<Self> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.n_atoms).collect::<Vec<_>>() {
            return Err(Error::Layout(format!("{perm:?} is not a permutation of the atoms")));
        }
        let pts: Vec<(usize, f64)> = self.points.iter().map(|p| (perm[p.atom], p.phase)).collect();
        Self::from_phases(&pts, self.gamma_right, self.gamma_left)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gamma_right={} gamma_left={} points=[", self.gamma_right, self.gamma_left)?;
        for (nu, p) in self.points.iter().enumerate() {
            if nu > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{:.6}", p.atom, p.phase)?;
        }
        write!(f, "]")
    }
}

/// A physical coupling position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position {
    pub atom: usize,
    pub x: f64,
}

/// Converts positions to phases `φ = k₀ x`, sorting points by `x`.
pub fn phases_from_positions(k0: f64, positions: &[Position], gamma_right: f64, gamma_left: f64) -> Result<Layout> {
    if !(k0.is_finite() && k0 > 0.0) {
        return Err(Error::Layout(format!("k0 must be positive, got {k0}")));
    }
    if let Some(p) = positions.iter().find(|p| !p.x.is_finite()) {
        return Err(Error::Layout(format!("non-finite position {}", p.x)));
    }
    let mut sorted = positions.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
    if let Some(w) = sorted.windows(2).find(|w| w[0].x == w[1].x) {
        return Err(Error::Layout(format!("degenerate layout: two points at x = {}", w[0].x)));
    }
    let pts: Vec<(usize, f64)> = sorted.iter().map(|p| (p.atom, k0 * p.x)).collect();
    Layout::from_phases(&pts, gamma_right, gamma_left)
}

/// Per-atom DF residuals `|Σ_ℓ e^{−iφ_jℓ}|`.
#[derive(Clone, Debug, PartialEq)]
pub struct DfReport {
    pub per_atom_residual: Vec<f64>,
    pub is_df: bool,
    pub tolerance: f64,
    /// Largest difference between a residual and its conjugate-phase
    /// counterpart `|Σ_ℓ e^{+iφ_jℓ}|`; zero up to roundoff (`S = 0 ⇔ S' = 0`).
    pub conjugate_gap: f64,
}

fn phase_sum(phases: impl Iterator<Item = f64>, sign: f64) -> C64 {
    phases.map(|p| C64::from_polar(1.0, sign * p)).sum()
}

pub fn df_residual(layout: &Layout, tol: f64) -> DfReport {
    let mut residuals = Vec::with_capacity(layout.n_atoms());
    let mut gap = 0.0f64;
    for j in 0..layout.n_atoms() {
        let r = phase_sum(layout.atom_phases(j).into_iter(), -1.0).norm();
        let r_conj = phase_sum(layout.atom_phases(j).into_iter(), 1.0).norm();
        gap = gap.max((r - r_conj).abs());
        residuals.push(r);
    }
    let is_df = residuals.iter().all(|&r| r <= tol);
    DfReport { per_atom_residual: residuals, is_df, tolerance: tol, conjugate_gap: gap }
}

/// Ordering of two giant atoms with two points each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TwoAtomTopology {
    Serial,
    Nested,
    Braided,
    /// Two atoms, but not exactly two points each.
    Other,
}

impl fmt::Display for TwoAtomTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Serial => "serial",
            Self::Nested => "nested",
            Self::Braided => "braided",
            Self::Other => "other",
        };
        f.write_str(s)
    }
}

pub fn classify_two_atom(layout: &Layout) -> Result<TwoAtomTopology> {
    if layout.n_atoms() != 2 {
        return Err(Error::Classification(format!(
            "two-atom classification needs 2 atoms, layout has {}",
            layout.n_atoms()
        )));
    }
    if layout.atom_points(0).len() != 2 || layout.atom_points(1).len() != 2 {
        return Ok(TwoAtomTopology::Other);
    }
    let mut pattern = layout.pattern();
    if pattern[0] == 1 {
        pattern.iter_mut().for_each(|a| *a = 1 - *a);
    }
    Ok(match pattern.as_slice() {
        [0, 0, 1, 1] => TwoAtomTopology::Serial,
        [0, 1, 1, 0] => TwoAtomTopology::Nested,
        [0, 1, 0, 1] => TwoAtomTopology::Braided,
        _ => unreachable!("two atoms with two points each always fall in one of three patterns"),
    })
}

/// True iff a point of another atom lies strictly between atom `j`'s
/// outermost points.
pub fn is_interleaved(layout: &Layout, j: usize) -> bool {
    let own = layout.atom_points(j);
    match (own.first(), own.last()) {
        (Some(&first), Some(&last)) if last > first => {
            layout.points()[first + 1..last].iter().any(|p| p.atom != j)
        }
        _ => false,
    }
}

/// Random layouts satisfying the DF condition, for property checks.
pub mod random {
    use super::*;

    fn odd_pi_partner<R: Rng>(rng: &mut R, base: f64) -> f64 {
        let n: i32 = rng.random_range(-2..=2);
        base + (2 * n + 1) as f64 * PI
    }

    fn assign(order: &[usize], n_atoms: usize, rng: &mut impl Rng) -> Vec<(usize, f64)> {
        let bases: Vec<f64> = (0..n_atoms).map(|_| rng.random_range(-PI..PI)).collect();
        let partners: Vec<f64> = bases.iter().map(|&b| odd_pi_partner(rng, b)).collect();
        let mut seen = vec![false; n_atoms];
        order
            .iter()
            .map(|&a| {
                let phase = if seen[a] { partners[a] } else { bases[a] };
                seen[a] = true;
                (a, phase)
            })
            .collect()
    }

    /// Two points per atom, random base phases, odd-π spacing, random order.
    pub fn df_layout<R: Rng>(rng: &mut R, n_atoms: usize, gamma_right: f64, gamma_left: f64) -> Layout {
        let mut order: Vec<usize> = (0..n_atoms).flat_map(|a| [a, a]).collect();
        order.shuffle(rng);
        let pts = assign(&order, n_atoms, rng);
        Layout::from_phases(&pts, gamma_right, gamma_left).expect("generated layout is valid")
    }

    /// Like [`df_layout`], but one atom (returned alongside) has its two
    /// points adjacent so that it is not interleaved with any other atom.
    pub fn df_layout_with_isolated_atom<R: Rng>(
        rng: &mut R,
        n_atoms: usize,
        gamma_right: f64,
        gamma_left: f64,
    ) -> (Layout, usize) {
        assert!(n_atoms >= 2, "need at least two atoms");
        let isolated = rng.random_range(0..n_atoms);
        let mut others: Vec<usize> = (0..n_atoms).filter(|&a| a != isolated).flat_map(|a| [a, a]).collect();
        others.shuffle(rng);
        let at = rng.random_range(0..=others.len());
        others.splice(at..at, [isolated, isolated]);
        let pts = assign(&others, n_atoms, rng);
        let layout = Layout::from_phases(&pts, gamma_right, gamma_left).expect("generated layout is valid");
        (layout, isolated)
    }
}
