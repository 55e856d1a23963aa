// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra on small multipartite Hilbert spaces.
//!
//! Tensor factors are always ordered left to right, factor 0 being the most
//! significant digit of a composite basis index.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tolerance;

pub type Matrix = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A dense square complex matrix.
///
/// Hamiltonians, unitaries and density matrices all share this type; the
/// Hermitian and unitary "tags" are checked on demand with
/// [`is_hermitian`](Self::is_hermitian) and [`is_unitary`](Self::is_unitary).
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix(Matrix);

impl OperatorMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::Dimension("operator dimension must be positive".into()));
        }
        Ok(Self(m))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(Matrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Matrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim, dim))
    }

    /// Row-major construction from real entries; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| {
            assert_eq!(rows[i].len(), n, "ragged rows");
            C64::new(rows[i][j], 0.0)
        })
    }

    /// Row-major construction from complex entries; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| {
            assert_eq!(rows[i].len(), n, "ragged rows");
            rows[i][j]
        })
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { ZERO })
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalised) ket.
    pub fn outer(ket: &[C64]) -> Self {
        Self::from_fn(ket.len(), |i, j| ket[i] * ket[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `max |A − A†|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// `‖U†U − 𝟙‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.0.adjoint() * &self.0;
        Self(prod).max_diff(&Self::identity(self.dim()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// `U · self · U†`.
    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        self.0.clone().singular_values().max()
    }

    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }

    pub fn apply(&self, ket: &[C64]) -> Vec<C64> {
        assert_eq!(ket.len(), self.dim(), "dimension mismatch");
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)] * ket[j]).sum())
            .collect()
    }

    pub fn powi(&self, n: usize) -> Self {
        let mut acc = Self::identity(self.dim());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Restriction to the given basis indices (rows and columns).
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.0[(rows[i], cols[j])])
    }
}

impl Index<(usize, usize)> for OperatorMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl fmt::Display for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.0[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&OperatorMatrix> for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                OperatorMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $trait<OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: OperatorMatrix) -> OperatorMatrix {
                &self $op &rhs
            }
        }
        impl $trait<&OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                &self $op rhs
            }
        }
        impl $trait<OperatorMatrix> for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: OperatorMatrix) -> OperatorMatrix {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, c: C64) -> OperatorMatrix {
        OperatorMatrix(&self.0 * c)
    }
}

impl Mul<C64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, c: C64) -> OperatorMatrix {
        OperatorMatrix(self.0 * c)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, c: f64) -> OperatorMatrix {
        self * C64::new(c, 0.0)
    }
}

impl Mul<f64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, c: f64) -> OperatorMatrix {
        self * C64::new(c, 0.0)
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-self.0)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-self.0.clone())
    }
}

/// Local dimensions of the tensor factors, left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemDims(Vec<usize>);

impl SubsystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(dims, tolerance::MAX_DIM)
    }

    pub fn with_cap(dims: Vec<usize>, cap: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Dimension("at least one tensor factor required".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Dimension(format!("zero local dimension in {dims:?}")));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= cap)
            .ok_or_else(|| Error::Dimension(format!("product of {dims:?} exceeds cap {cap}")))?;
        Ok(Self(dims))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn check(&self, op: &OperatorMatrix) -> Result<()> {
        if self.total() != op.dim() {
            return Err(Error::Dimension(format!(
                "factor dims {:?} (product {}) do not match operator dimension {}",
                self.0,
                self.total(),
                op.dim()
            )));
        }
        Ok(())
    }

    /// Digits of a composite index, factor 0 first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for (k, &d) in self.0.iter().enumerate().rev() {
            out[k] = index % d;
            index /= d;
        }
        out
    }

    pub fn compose(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.0).fold(0, |acc, (&x, &d)| acc * d + x)
    }
}

/// Kronecker product `A ⊗ B` with the default dimension cap.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    kron_capped(a, b, tolerance::MAX_DIM)
}

pub fn kron_capped(a: &OperatorMatrix, b: &OperatorMatrix, cap: usize) -> Result<OperatorMatrix> {
    match a.dim().checked_mul(b.dim()) {
        Some(d) if d <= cap => Ok(OperatorMatrix(a.0.kronecker(&b.0))),
        _ => Err(Error::Dimension(format!(
            "kron of {}x{} and {}x{} exceeds cap {cap}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        ))),
    }
}

/// Left-to-right Kronecker product of several factors.
pub fn kron_all(ops: &[&OperatorMatrix]) -> Result<OperatorMatrix> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::Dimension("kron_all needs at least one factor".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, op| kron(&acc, op))
}

/// `𝟙 ⊗ … ⊗ op ⊗ … ⊗ 𝟙` with `op` on factor `site`.
pub fn embed(op: &OperatorMatrix, dims: &SubsystemDims, site: usize) -> Result<OperatorMatrix> {
    let local = *dims
        .as_slice()
        .get(site)
        .ok_or_else(|| Error::Dimension(format!("site {site} out of range for {dims:?}")))?;
    if local != op.dim() {
        return Err(Error::Dimension(format!(
            "operator of dim {} placed on factor of dim {local}",
            op.dim()
        )));
    }
    let left: usize = dims.as_slice()[..site].iter().product();
    let right: usize = dims.as_slice()[site + 1..].iter().product();
    let tmp = kron(&OperatorMatrix::identity(left), op)?;
    kron(&tmp, &OperatorMatrix::identity(right))
}

/// Spectral decomposition `H = Q Λ Q†` of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    values: Vec<f64>,
    vectors: Matrix,
}

impl HermitianSpectrum {
    pub fn of(h: &OperatorMatrix) -> Result<Self> {
        let scale = h.max_abs().max(1.0);
        let defect = h.hermitian_defect();
        if defect > tolerance::STRUCTURAL * scale {
            return Err(Error::Contract(format!(
                "generator is not Hermitian (max |H - H†| = {defect:.3e})"
            )));
        }
        let eig = SymmetricEigen::new(h.hermitian_part().into_matrix());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Matrix::from_fn(h.dim(), h.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Self { values, vectors })
    }

    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k).iter().copied().collect()
    }

    /// `Q f(Λ) Q†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> OperatorMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        OperatorMatrix(scaled * self.vectors.adjoint())
    }

    /// `exp(−i H t)`.
    pub fn propagator(&self, t: f64) -> OperatorMatrix {
        self.map(|lambda| C64::from_polar(1.0, -lambda * t))
    }
}

/// `exp(−i H t)` for Hermitian `H`, via the spectral decomposition.
pub fn expm_generator(h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    Ok(HermitianSpectrum::of(h)?.propagator(t))
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn hermitian_eigenvalues(h: &OperatorMatrix) -> Result<Vec<f64>> {
    Ok(HermitianSpectrum::of(h)?.values)
}

fn validate_keep(dims: &SubsystemDims, keep: &[usize]) -> Result<Vec<usize>> {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::Dimension("partial trace must keep at least one factor".into()));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("factor {bad} out of range for {dims:?}")));
    }
    Ok(keep)
}

/// Partial trace over every factor not listed in `keep`.
pub fn partial_trace(op: &OperatorMatrix, dims: &SubsystemDims, keep: &[usize]) -> Result<OperatorMatrix> {
    dims.check(op)?;
    let keep = validate_keep(dims, keep)?;
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims.as_slice()[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims.as_slice()[k]).collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    // groups[t] lists (kept index, full index) pairs sharing traced index t
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_total); traced_total];
    for full in 0..op.dim() {
        let d = dims.digits(full);
        let k = keep.iter().fold(0, |acc, &f| acc * dims.as_slice()[f] + d[f]);
        let t = traced.iter().fold(0, |acc, &f| acc * dims.as_slice()[f] + d[f]);
        groups[t].push((k, full));
    }
    let mut out = Matrix::zeros(kept_total, kept_total);
    for group in &groups {
        for &(ki, fi) in group {
            for &(kj, fj) in group {
                out[(ki, kj)] += op.0[(fi, fj)];
            }
        }
    }
    Ok(OperatorMatrix(out))
}

/// Reorders tensor factors: factor `perm[k]` of the input becomes factor `k`
/// of the output.
pub fn permute_subsystems(op: &OperatorMatrix, dims: &SubsystemDims, perm: &[usize]) -> Result<OperatorMatrix> {
    dims.check(op)?;
    let mut seen = perm.to_vec();
    seen.sort_unstable();
    if seen != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::Dimension(format!("{perm:?} is not a permutation of {} factors", dims.len())));
    }
    let new_dims = SubsystemDims(perm.iter().map(|&p| dims.as_slice()[p]).collect());
    let map: Vec<usize> = (0..op.dim())
        .map(|i| {
            let d = dims.digits(i);
            let nd: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
            new_dims.compose(&nd)
        })
        .collect();
    let mut out = Matrix::zeros(op.dim(), op.dim());
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            out[(map[i], map[j])] = op.0[(i, j)];
        }
    }
    Ok(OperatorMatrix(out))
}

/// `max |e^{iθ}U − V|` with the global phase θ chosen from `Tr(U†V)`, which
/// maximises `|Tr(U†V)|/dim` alignment.
pub fn max_diff_up_to_phase(u: &OperatorMatrix, v: &OperatorMatrix) -> f64 {
    let overlap = (u.dagger() * v).trace();
    let phase = if overlap.norm() > f64::MIN_POSITIVE {
        overlap / overlap.norm()
    } else {
        ONE
    };
    (u * phase).max_diff(v)
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(OperatorMatrix);

impl DensityMatrix {
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let tr = op.trace();
        if (tr - ONE).norm() > tolerance::DENSITY {
            return Err(Error::Contract(format!("density matrix trace is {tr}")));
        }
        if !op.is_hermitian(tolerance::STRUCTURAL) {
            return Err(Error::Contract("density matrix is not Hermitian".into()));
        }
        let min = hermitian_eigenvalues(&op)?[0];
        if min < -tolerance::DENSITY {
            return Err(Error::Contract(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(Self(op))
    }

    /// Pure state from a ket, normalised here.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if ket.is_empty() || norm == 0.0 {
            return Err(Error::Contract("cannot build a state from a zero ket".into()));
        }
        let ket: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Ok(Self(OperatorMatrix::outer(&ket)))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!("basis index {index} out of range {dim}")));
        }
        let mut ket = vec![ZERO; dim];
        ket[index] = ONE;
        Self::pure(&ket)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(OperatorMatrix::identity(dim) * (1.0 / dim as f64))
    }

    /// Wraps an operator known to be a state by construction (e.g. the
    /// output of a CPTP map applied to a state).
    pub(crate) fn from_trusted(op: OperatorMatrix) -> Self {
        Self(op)
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.0
    }

    pub fn into_operator(self) -> OperatorMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn purity(&self) -> f64 {
        let m = self.0.matrix();
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> C64 {
        (&self.0 * op).trace()
    }

    pub fn partial_trace(&self, dims: &SubsystemDims, keep: &[usize]) -> Result<Self> {
        Ok(Self(partial_trace(&self.0, dims, keep)?))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self(kron(&self.0, &other.0)?))
    }

    /// `U ρ U†`; `u` must be unitary for the result to remain a state.
    pub fn evolve(&self, u: &OperatorMatrix) -> Self {
        Self(self.0.conjugate_by(u))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateMetrics {
    pub trace_distance: f64,
    pub fidelity: f64,
}

/// Trace distance `½‖ρ−σ‖₁` and Uhlmann fidelity `(Tr√(√ρ σ √ρ))²`.
pub fn metrics(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<StateMetrics> {
    Ok(StateMetrics {
        trace_distance: trace_distance(rho, sigma)?,
        fidelity: fidelity(rho, sigma)?,
    })
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!("states of dim {} and {}", rho.dim(), sigma.dim())));
    }
    let diff = (rho.operator() - sigma.operator()).hermitian_part();
    let d = 0.5 * hermitian_eigenvalues(&diff)?.iter().map(|l| l.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!("states of dim {} and {}", rho.dim(), sigma.dim())));
    }
    let sqrt_rho = HermitianSpectrum::of(&rho.operator().hermitian_part())?
        .map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let inner = (&sqrt_rho * sigma.operator() * &sqrt_rho).hermitian_part();
    let root_sum: f64 = hermitian_eigenvalues(&inner)?.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Pauli and ladder matrices in the `(|g⟩, |e⟩)` = `(|0⟩, |1⟩)` basis.
pub mod pauli {
    use super::{OperatorMatrix, C64};

    /// `σ = |0⟩⟨1|`.
    pub fn lowering() -> OperatorMatrix {
        OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    pub fn raising() -> OperatorMatrix {
        lowering().dagger()
    }

    pub fn x() -> OperatorMatrix {
        OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> OperatorMatrix {
        OperatorMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ])
    }

    /// `|1⟩⟨1| − |0⟩⟨0|`, i.e. `|e⟩⟨e| − |g⟩⟨g|`.
    pub fn z() -> OperatorMatrix {
        OperatorMatrix::from_real_rows(&[&[-1.0, 0.0], &[0.0, 1.0]])
    }
}

/// Truncated bosonic annihilation operator `b|n⟩ = √n |n−1⟩` on `d` levels.
pub fn annihilation(d: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(d, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_identity_and_pauli() {
        let i2 = OperatorMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), OperatorMatrix::identity(4));
        let zz = kron(&pauli::z(), &i2).unwrap();
        // pauli::z is diag(-1, 1) in our (g, e) ordering
        let expected = OperatorMatrix::diagonal(&[c(-1., 0.), c(-1., 0.), c(1., 0.), c(1., 0.)]);
        assert_eq!(zz, expected);
    }

    #[test]
    fn kron_respects_cap() {
        let big = OperatorMatrix::identity(64);
        assert!(kron(&big, &big).is_ok());
        let bigger = OperatorMatrix::identity(65);
        assert!(matches!(kron(&bigger, &bigger), Err(Error::Dimension(_))));
        assert!(kron_capped(&big, &big, 1 << 12).is_ok());
        assert!(kron_capped(&big, &big, 4095).is_err());
    }

    #[test]
    fn subsystem_dims_validation() {
        assert!(SubsystemDims::new(vec![]).is_err());
        assert!(SubsystemDims::new(vec![2, 0]).is_err());
        assert!(SubsystemDims::new(vec![64, 65]).is_err());
        let dims = SubsystemDims::new(vec![2, 3, 4]).unwrap();
        assert_eq!(dims.total(), 24);
        for i in 0..24 {
            assert_eq!(dims.compose(&dims.digits(i)), i);
        }
    }

    #[test]
    fn expm_zero_and_pauli() {
        let u = expm_generator(&OperatorMatrix::zeros(3), 1.7).unwrap();
        assert!(u.max_diff(&OperatorMatrix::identity(3)) < 1e-15);

        let u = expm_generator(&pauli::x(), PI / 2.0).unwrap();
        let expected = &pauli::x() * c(0.0, -1.0);
        assert!(u.max_diff(&expected) < 1e-14);

        let t = 0.37;
        let u = expm_generator(&pauli::x(), t).unwrap();
        let expected = OperatorMatrix::identity(2) * t.cos() + &pauli::x() * c(0.0, -t.sin());
        assert!(u.max_diff(&expected) < 1e-14);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let err = expm_generator(&pauli::lowering(), 1.0).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn partial_trace_of_bell_state_is_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let phi = DensityMatrix::pure(&[c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]).unwrap();
        let dims = SubsystemDims::new(vec![2, 2]).unwrap();
        let red = phi.partial_trace(&dims, &[0]).unwrap();
        assert!(red.operator().max_diff(&DensityMatrix::maximally_mixed(2).into_operator()) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let dims = SubsystemDims::new(vec![2, 3]).unwrap();
        let op = OperatorMatrix::identity(4);
        assert!(matches!(partial_trace(&op, &dims, &[0]), Err(Error::Dimension(_))));
        let op = OperatorMatrix::identity(6);
        assert!(partial_trace(&op, &dims, &[]).is_err());
        assert!(partial_trace(&op, &dims, &[2]).is_err());
    }

    #[test]
    fn permutation_swaps_factors() {
        let a = pauli::lowering();
        let b = pauli::z();
        let ab = kron(&a, &b).unwrap();
        let ba = kron(&b, &a).unwrap();
        let dims = SubsystemDims::new(vec![2, 2]).unwrap();
        assert_eq!(permute_subsystems(&ab, &dims, &[1, 0]).unwrap(), ba);
        assert!(permute_subsystems(&ab, &dims, &[0, 0]).is_err());
    }

    #[test]
    fn metrics_extremes() {
        let zero = DensityMatrix::basis(2, 0).unwrap();
        let one = DensityMatrix::basis(2, 1).unwrap();
        let m = metrics(&zero, &zero).unwrap();
        assert!(m.trace_distance.abs() < 1e-14 && (m.fidelity - 1.0).abs() < 1e-12);
        let m = metrics(&zero, &one).unwrap();
        assert!((m.trace_distance - 1.0).abs() < 1e-14 && m.fidelity.abs() < 1e-14);
        assert!(metrics(&zero, &DensityMatrix::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(OperatorMatrix::identity(2)).is_err());
        assert!(DensityMatrix::new(OperatorMatrix::diagonal(&[c(1.5, 0.), c(-0.5, 0.)])).is_err());
        assert!(DensityMatrix::new(pauli::lowering()).is_err());
        assert!(DensityMatrix::pure(&[c(0., 0.)]).is_err());
        let rho = DensityMatrix::new(OperatorMatrix::diagonal(&[c(0.25, 0.), c(0.75, 0.)])).unwrap();
        assert!((rho.purity() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn ladder_commutator_defect_is_on_top_level_only() {
        let d = 4;
        let b = annihilation(d);
        let comm = b.commutator(&b.dagger());
        for n in 0..d {
            let expected = if n + 1 < d { 1.0 } else { 1.0 - d as f64 };
            assert!((comm[(n, n)].re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn global_phase_comparison() {
        let u = expm_generator(&pauli::y(), 0.3).unwrap();
        let v = &u * C64::from_polar(1.0, 1.1);
        assert!(max_diff_up_to_phase(&u, &v) < 1e-14);
        assert!(u.max_diff(&v) > 0.1);
    }
}
