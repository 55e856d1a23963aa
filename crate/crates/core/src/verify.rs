// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! The invariant suite behind `giantdf verify`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{circuit_unitary, compile_braided, cascaded_in_circuit_frame};
use crate::collision::{
    cascaded_unitary, commutator_sum, magnus_consistency, restricted_diff, vacuum_column_diff,
};
use crate::effective::{
    coupling_matrix, decoupling_residual, effective_hamiltonian, lamb_shift_check, second_order_h, AtomRegister,
    JointSpace,
};
use crate::error::Result;
use crate::tensor::{hermitian_eigenvalues, max_diff_up_to_phase, OperatorMatrix};
use crate::tolerance;
use crate::topology::{df_residual, random, Layout};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<28} value={:.3e} bound={}", self.name, self.value, self.bound)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed={}", self.seed)?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn at_most(name: &'static str, value: f64, limit: f64) -> CheckResult {
    CheckResult { name, value, bound: format!("<= {limit:e}"), passed: value <= limit }
}

fn trivial_topologies(tol: f64) -> Result<CheckResult> {
    let layouts = [
        Layout::equally_spaced(&[0, 0, 1, 1], PI, 1.0, 0.0)?,
        Layout::equally_spaced(&[0, 1, 1, 0], PI, 1.0, 0.0)?,
        Layout::equally_spaced(&[0, 0], PI, 1.0, 0.0)?,
    ];
    let mut worst = 0.0f64;
    for l in &layouts {
        let space = JointSpace::for_layout(l, 2)?;
        let u = cascaded_unitary(l, &space, 0.01)?;
        worst = worst.max(u.max_diff(&OperatorMatrix::identity(space.dim())));
    }
    Ok(at_most("trivial-topology identity", worst, tol))
}

fn braided_spectrum(tol: f64) -> Result<CheckResult> {
    let atoms = AtomRegister::new(2)?;
    let mut worst = 0.0f64;
    for (g, gp, expected) in [(1.0, 0.0, 1.0), (0.5, 0.5, 1.0)] {
        let l = Layout::equally_spaced(&[0, 1, 0, 1], FRAC_PI_2, g, gp)?;
        let h = effective_hamiltonian(&l, &atoms)?;
        let idx = atoms.single_excitation_indices();
        let block = OperatorMatrix::new(h.restrict(&idx, &idx))?;
        let e = hermitian_eigenvalues(&block)?;
        worst = worst.max((e[0] + expected).abs()).max((e[1] - expected).abs());
    }
    Ok(at_most("braided spectrum", worst, tol))
}

fn magnus_order() -> Result<CheckResult> {
    let l = Layout::equally_spaced(&[0, 1, 0, 1], FRAC_PI_2, 1.0, 0.0)?;
    let space = JointSpace::for_layout(&l, 2)?;
    let a = magnus_consistency(&l, &space, 1e-2)?;
    let b = magnus_consistency(&l, &space, 5e-3)?;
    let worst = if (a.order - 1.75).abs() > (b.order - 1.75).abs() { a.order } else { b.order };
    let passed = [a.order, b.order].iter().all(|o| (1.3..=2.2).contains(o));
    Ok(CheckResult { name: "magnus order", value: worst, bound: "in [1.3, 2.2]".into(), passed })
}

fn commutator_identity(rng: &mut ChaCha8Rng, tol: f64) -> Result<[CheckResult; 2]> {
    let (mut uni, mut bi) = (0.0f64, 0.0f64);
    for i in 0..10 {
        let n_atoms = rng.random_range(1..=2);
        let gp = if i % 2 == 0 { 0.0 } else { rng.random_range(0.1..1.0) };
        let g = rng.random_range(0.5..1.5);
        let l = random::df_layout(rng, n_atoms, g, gp);
        let space = JointSpace::for_layout(&l, 3)?;
        let lhs = commutator_sum(&l, &space, 0.01)?;
        let rhs = second_order_h(&l, &space)?;
        if l.is_unidirectional() {
            uni = uni.max(restricted_diff(&lhs, &rhs, &space.below_top_indices()));
        } else {
            // b†b′ cross terms survive for interleaved atoms; they vanish on vacuum input.
            bi = bi.max(vacuum_column_diff(&lhs, &rhs, &space));
        }
    }
    Ok([at_most("commutator-sum identity", uni, tol), at_most("commutator-sum (two-way, vacuum)", bi, tol)])
}

fn decoupling(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (g, gp) = (rng.random_range(0.1..2.0), rng.random_range(0.0..2.0));
        let (l, isolated) = random::df_layout_with_isolated_atom(rng, 3, g, gp);
        let j = coupling_matrix(&l);
        worst = worst.max(decoupling_residual(&j, isolated)).max(j.decomposition_defect());
    }
    Ok(at_most("non-interleaved decoupling", worst, tolerance::COUPLING))
}

fn coupling_reconstruction(rng: &mut ChaCha8Rng, tol: f64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (g, gp) = (rng.random_range(0.1..2.0), rng.random_range(0.0..2.0));
        let l = random::df_layout(rng, 3, g, gp);
        let atoms = AtomRegister::new(3)?;
        let h = effective_hamiltonian(&l, &atoms)?;
        worst = worst.max(coupling_matrix(&l).hamiltonian(&atoms)?.max_diff(&h));
    }
    Ok(at_most("coupling-matrix reconstruction", worst, tol))
}

fn circuit_equivalence(tol: f64) -> Result<CheckResult> {
    let l = Layout::equally_spaced(&[0, 1, 0, 1], FRAC_PI_2, 1.0, 0.0)?;
    let mut worst = 0.0f64;
    for gdt in [0.25, 0.01, 1e-4] {
        let c = circuit_unitary(&compile_braided(1.0, gdt)?)?;
        worst = worst.max(max_diff_up_to_phase(&c, &cascaded_in_circuit_frame(&l, gdt)?));
    }
    Ok(at_most("circuit equivalence", worst, tol))
}

fn random_df(rng: &mut ChaCha8Rng) -> CheckResult {
    let worst = (0..20)
        .map(|_| {
            let n = rng.random_range(1..=4);
            let l = random::df_layout(rng, n, 1.0, 0.0);
            df_residual(&l, tolerance::DF_DEFAULT).per_atom_residual.into_iter().fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    at_most("odd-pi layouts are DF", worst, tolerance::DF_DEFAULT)
}

fn lamb_shift(tol: f64) -> Result<CheckResult> {
    let l = Layout::from_phases(&[(0, 0.0), (0, 2.0 * PI / 3.0), (0, 4.0 * PI / 3.0)], 1.0, 0.0)?;
    let r = lamb_shift_check(&l)?;
    Ok(at_most("three-point sine sum", (r.sine_sum - 3f64.sqrt() / 2.0).abs(), tol))
}

/// Runs every check. `tol` overrides the tolerance of the exact operator
/// identities (default `1e−12`).
pub fn run_suite(seed: u64, tol: Option<f64>) -> Result<VerifyReport> {
    let tol = tol.unwrap_or(tolerance::STRUCTURAL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![trivial_topologies(tol)?, braided_spectrum(tol)?, magnus_order()?];
    checks.extend(commutator_identity(&mut rng, tol)?);
    checks.extend([
        decoupling(&mut rng)?,
        coupling_reconstruction(&mut rng, tol)?,
        circuit_equivalence(tol)?,
        random_df(&mut rng),
        lamb_shift(tol)?,
    ]);
    Ok(VerifyReport { seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_deterministic() {
        let a = run_suite(11, None).unwrap();
        for c in &a.checks {
            assert!(c.passed, "{c}");
        }
        assert_eq!(a, run_suite(11, None).unwrap());
    }

    #[test]
    fn impossible_tolerance_fails() {
        let r = run_suite(1, Some(0.0)).unwrap();
        assert!(!r.all_passed());
    }
}
