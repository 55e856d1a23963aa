// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! Collective atomic operators, the averaged interaction, the second-order
//! Hamiltonian `𝓗` and the closed-form coupling matrix `J`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::{self, annihilation, embed, pauli, DensityMatrix, Matrix, OperatorMatrix, SubsystemDims};
use crate::tolerance;
use crate::topology::{df_residual, Layout};

/// `n` two-level atoms, atom 0 being the leftmost tensor factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomRegister {
    dims: SubsystemDims,
}

impl AtomRegister {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::Dimension("at least one atom required".into()));
        }
        Ok(Self { dims: SubsystemDims::new(vec![2; n_atoms])? })
    }

    pub fn for_layout(layout: &Layout) -> Result<Self> {
        Self::new(layout.n_atoms())
    }

    pub fn n_atoms(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    fn check_atom(&self, j: usize) -> Result<()> {
        if j >= self.n_atoms() {
            return Err(Error::Dimension(format!("atom {j} out of range for {} atoms", self.n_atoms())));
        }
        Ok(())
    }

    /// `σ_j = |g⟩_j⟨e|`.
    pub fn lowering(&self, j: usize) -> Result<OperatorMatrix> {
        self.check_atom(j)?;
        embed(&pauli::lowering(), &self.dims, j)
    }

    pub fn raising(&self, j: usize) -> Result<OperatorMatrix> {
        Ok(self.lowering(j)?.dagger())
    }

    pub fn sigma_z(&self, j: usize) -> Result<OperatorMatrix> {
        self.check_atom(j)?;
        embed(&pauli::z(), &self.dims, j)
    }

    /// `σ_j†σ_j`.
    pub fn excited_projector(&self, j: usize) -> Result<OperatorMatrix> {
        let s = self.lowering(j)?;
        Ok(s.dagger() * s)
    }

    /// Basis index of the product state with `excited[j]` telling whether
    /// atom `j` is in `|e⟩`.
    pub fn basis_index(&self, excited: &[bool]) -> Result<usize> {
        if excited.len() != self.n_atoms() {
            return Err(Error::Dimension(format!(
                "{} excitation flags for {} atoms",
                excited.len(),
                self.n_atoms()
            )));
        }
        let digits: Vec<usize> = excited.iter().map(|&e| usize::from(e)).collect();
        Ok(self.dims.compose(&digits))
    }

    pub fn product_state(&self, excited: &[bool]) -> Result<DensityMatrix> {
        DensityMatrix::basis(self.dim(), self.basis_index(excited)?)
    }

    /// Basis indices with exactly one excited atom, atom 0 first.
    pub fn single_excitation_indices(&self) -> Vec<usize> {
        (0..self.n_atoms())
            .map(|j| {
                let flags: Vec<bool> = (0..self.n_atoms()).map(|k| k == j).collect();
                self.basis_index(&flags).expect("flag count matches")
            })
            .collect()
    }

    /// Excited-state population of every atom.
    pub fn populations(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::Dimension(format!("state of dim {} for {} atoms", rho.dim(), self.n_atoms())));
        }
        (0..self.n_atoms())
            .map(|j| Ok(rho.expectation(&self.excited_projector(j)?).re))
            .collect()
    }
}

/// Truncated time-bin oscillators: the right-going bin `b` and, in
/// bidirectional mode, the left-going bin `b'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinRegister {
    d_right: usize,
    /// Zero in unidirectional mode.
    d_left: usize,
}

impl BinRegister {
    pub fn new(d_right: usize, d_left: usize) -> Result<Self> {
        if d_right < 2 {
            return Err(Error::Dimension(format!("d_right must be >= 2, got {d_right}")));
        }
        if d_left == 1 {
            return Err(Error::Dimension("d_left must be 0 (unidirectional) or >= 2".into()));
        }
        Ok(Self { d_right, d_left })
    }

    pub fn unidirectional(d: usize) -> Result<Self> {
        Self::new(d, 0)
    }

    pub fn bidirectional(d_right: usize, d_left: usize) -> Result<Self> {
        if d_left < 2 {
            return Err(Error::Dimension(format!("d_left must be >= 2, got {d_left}")));
        }
        Self::new(d_right, d_left)
    }

    /// Unidirectional when the layout has `γ' = 0`, bidirectional otherwise.
    pub fn for_layout(layout: &Layout, d: usize) -> Result<Self> {
        if layout.is_unidirectional() {
            Self::unidirectional(d)
        } else {
            Self::bidirectional(d, d)
        }
    }

    pub fn d_right(&self) -> usize {
        self.d_right
    }

    pub fn d_left(&self) -> usize {
        self.d_left
    }

    pub fn is_bidirectional(&self) -> bool {
        self.d_left > 0
    }

    pub fn dims(&self) -> Vec<usize> {
        if self.is_bidirectional() {
            vec![self.d_right, self.d_left]
        } else {
            vec![self.d_right]
        }
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// Single-bin Fock state `|n⟩⟨n|` on every bin factor.
    pub fn fock(&self, n: usize) -> Result<DensityMatrix> {
        let mut rho = DensityMatrix::basis(self.d_right, n)?;
        if self.is_bidirectional() {
            rho = rho.tensor(&DensityMatrix::basis(self.d_left, n)?)?;
        }
        Ok(rho)
    }

    pub fn vacuum(&self) -> DensityMatrix {
        self.fock(0).expect("vacuum always fits")
    }
}

/// The joint space atoms ⊗ right bin (⊗ left bin).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointSpace {
    atoms: AtomRegister,
    bins: BinRegister,
    dims: SubsystemDims,
}

impl JointSpace {
    pub fn new(atoms: AtomRegister, bins: BinRegister) -> Result<Self> {
        let mut d = atoms.dims().as_slice().to_vec();
        d.extend(bins.dims());
        let dims = SubsystemDims::new(d)?;
        Ok(Self { atoms, bins, dims })
    }

    /// Atom register sized to `layout`, bins chosen by [`BinRegister::for_layout`].
    pub fn for_layout(layout: &Layout, d: usize) -> Result<Self> {
        Self::new(AtomRegister::for_layout(layout)?, BinRegister::for_layout(layout, d)?)
    }

    pub fn atoms(&self) -> &AtomRegister {
        &self.atoms
    }

    pub fn bins(&self) -> &BinRegister {
        &self.bins
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn right_site(&self) -> usize {
        self.atoms.n_atoms()
    }

    pub fn left_site(&self) -> Option<usize> {
        self.bins.is_bidirectional().then(|| self.atoms.n_atoms() + 1)
    }

    /// `A ⊗ 𝟙_bins`.
    pub fn lift_atom_operator(&self, a: &OperatorMatrix) -> Result<OperatorMatrix> {
        if a.dim() != self.atoms.dim() {
            return Err(Error::Dimension(format!("atom operator of dim {} on {} atoms", a.dim(), self.atoms.n_atoms())));
        }
        tensor::kron(a, &OperatorMatrix::identity(self.bins.dim()))
    }

    pub fn b_right(&self) -> Result<OperatorMatrix> {
        embed(&annihilation(self.bins.d_right), &self.dims, self.right_site())
    }

    pub fn b_left(&self) -> Result<OperatorMatrix> {
        let site = self
            .left_site()
            .ok_or_else(|| Error::Config("left-going bin requested in unidirectional mode".into()))?;
        embed(&annihilation(self.bins.d_left), &self.dims, site)
    }

    fn bin_sites(&self) -> Vec<usize> {
        (self.atoms.n_atoms()..self.dims.len()).collect()
    }

    /// Indices whose bin digits are all zero.
    pub fn vacuum_indices(&self) -> Vec<usize> {
        let sites = self.bin_sites();
        (0..self.dim())
            .filter(|&i| {
                let d = self.dims.digits(i);
                sites.iter().all(|&s| d[s] == 0)
            })
            .collect()
    }

    /// Indices where every bin is below its top Fock level, the subspace on
    /// which the truncated ladder operators obey `[b, b†] = 𝟙`.
    pub fn below_top_indices(&self) -> Vec<usize> {
        let sites = self.bin_sites();
        (0..self.dim())
            .filter(|&i| {
                let d = self.dims.digits(i);
                sites.iter().all(|&s| d[s] + 1 < self.dims.as_slice()[s])
            })
            .collect()
    }

    pub fn with_vacuum_bins(&self, rho_atoms: &DensityMatrix) -> Result<DensityMatrix> {
        rho_atoms.tensor(&self.bins.vacuum())
    }

    pub fn atoms_marginal(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let keep: Vec<usize> = (0..self.atoms.n_atoms()).collect();
        rho.partial_trace(&self.dims, &keep)
    }

    pub fn bins_marginal(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.partial_trace(&self.dims, &self.bin_sites())
    }
}

fn check_atoms(layout: &Layout, atoms: &AtomRegister) -> Result<()> {
    if layout.n_atoms() != atoms.n_atoms() {
        return Err(Error::Dimension(format!(
            "layout has {} atoms but register has {}",
            layout.n_atoms(),
            atoms.n_atoms()
        )));
    }
    Ok(())
}

/// Checks that the bin register can carry the layout's emission.
pub(crate) fn check_space(layout: &Layout, space: &JointSpace) -> Result<()> {
    check_atoms(layout, space.atoms())?;
    if layout.gamma_left() > 0.0 && !space.bins().is_bidirectional() {
        return Err(Error::Config(
            "layout emits to the left (gamma_left > 0) but the bin register is unidirectional".into(),
        ));
    }
    Ok(())
}

/// `S_ν = e^{−iφ_ν} σ_{j(ν)}`, or `S'_ν = e^{+iφ_ν} σ_{j(ν)}` when `primed`.
pub fn point_operator(layout: &Layout, atoms: &AtomRegister, nu: usize, primed: bool) -> Result<OperatorMatrix> {
    check_atoms(layout, atoms)?;
    let p = layout
        .points()
        .get(nu)
        .ok_or_else(|| Error::Dimension(format!("point {nu} out of range")))?;
    let sign = if primed { 1.0 } else { -1.0 };
    Ok(atoms.lowering(p.atom)? * C64::from_polar(1.0, sign * p.phase))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveOps {
    pub s: OperatorMatrix,
    pub s_prime: OperatorMatrix,
}

/// `S = Σ_ν S_ν` and `S' = Σ_ν S'_ν` on the atom register.
pub fn collective_ops(layout: &Layout, atoms: &AtomRegister) -> Result<CollectiveOps> {
    let mut s = OperatorMatrix::zeros(atoms.dim());
    let mut s_prime = OperatorMatrix::zeros(atoms.dim());
    for nu in 0..layout.n_points() {
        s = s + point_operator(layout, atoms, nu, false)?;
        s_prime = s_prime + point_operator(layout, atoms, nu, true)?;
    }
    Ok(CollectiveOps { s, s_prime })
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

/// `V̄ = (1/√dt)(√γ S b† + √γ' S' b'† + H.c.)` on the joint space.
pub fn averaged_interaction(layout: &Layout, space: &JointSpace, dt: f64) -> Result<OperatorMatrix> {
    check_dt(dt)?;
    check_space(layout, space)?;
    let ops = collective_ops(layout, space.atoms())?;
    let mut a = space.lift_atom_operator(&ops.s)? * space.b_right()?.dagger() * (layout.gamma_right() / dt).sqrt();
    if space.left_site().is_some() {
        let left = space.lift_atom_operator(&ops.s_prime)? * space.b_left()?.dagger();
        a = a + left * (layout.gamma_left() / dt).sqrt();
    }
    Ok(&a + a.dagger())
}

/// Atom-only second-order Hamiltonian
/// `(i/2) Σ_{ν>ν'} (γ S_ν'†S_ν + γ' S'_ν†S'_ν' − H.c.)`.
pub fn effective_hamiltonian(layout: &Layout, atoms: &AtomRegister) -> Result<OperatorMatrix> {
    check_atoms(layout, atoms)?;
    let s: Vec<OperatorMatrix> = (0..layout.n_points())
        .map(|nu| point_operator(layout, atoms, nu, false))
        .collect::<Result<_>>()?;
    let sp: Vec<OperatorMatrix> = (0..layout.n_points())
        .map(|nu| point_operator(layout, atoms, nu, true))
        .collect::<Result<_>>()?;
    let (g, gp) = (layout.gamma_right(), layout.gamma_left());
    let mut a = OperatorMatrix::zeros(atoms.dim());
    for nu in 0..layout.n_points() {
        for nup in 0..nu {
            a = a + s[nup].dagger() * &s[nu] * g + sp[nu].dagger() * &sp[nup] * gp;
        }
    }
    Ok((&a - a.dagger()) * C64::new(0.0, 0.5))
}

/// `𝓗 = H_eff ⊗ 𝟙_bins`.
pub fn second_order_h(layout: &Layout, space: &JointSpace) -> Result<OperatorMatrix> {
    check_space(layout, space)?;
    space.lift_atom_operator(&effective_hamiltonian(layout, space.atoms())?)
}

/// Closed-form couplings: `J = γK + γ'K*`, with
/// `K_jj' = ½ Σ e^{i(φ_jℓ − φ_j'ℓ' + π/2)}` over pairs where point
/// `(j', ℓ')` lies to the right of `(j, ℓ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrixJ {
    pub j: Matrix,
    pub k: Matrix,
    pub gamma_right: f64,
    pub gamma_left: f64,
}

impl CouplingMatrixJ {
    pub fn n_atoms(&self) -> usize {
        self.j.nrows()
    }

    /// `Σ J_jj' σ_j†σ_j' + H.c.`
    pub fn hamiltonian(&self, atoms: &AtomRegister) -> Result<OperatorMatrix> {
        if atoms.n_atoms() != self.n_atoms() {
            return Err(Error::Dimension("register size does not match J".into()));
        }
        let lowering: Vec<OperatorMatrix> = (0..self.n_atoms()).map(|j| atoms.lowering(j)).collect::<Result<_>>()?;
        let mut h = OperatorMatrix::zeros(atoms.dim());
        for a in 0..self.n_atoms() {
            for b in 0..self.n_atoms() {
                h = h + lowering[a].dagger() * &lowering[b] * self.j[(a, b)];
            }
        }
        Ok(&h + h.dagger())
    }

    /// `max |J − (γK + γ'K*)|`.
    pub fn decomposition_defect(&self) -> f64 {
        let rebuilt = self.k.map(|z| z * self.gamma_right + z.conj() * self.gamma_left);
        (&self.j - rebuilt).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn coupling_matrix(layout: &Layout) -> CouplingMatrixJ {
    let n = layout.n_atoms();
    let mut k = Matrix::zeros(n, n);
    let pts = layout.points();
    for (earlier, p) in pts.iter().enumerate() {
        for q in &pts[earlier + 1..] {
            k[(p.atom, q.atom)] += C64::from_polar(0.5, p.phase - q.phase + FRAC_PI_2);
        }
    }
    let (g, gp) = (layout.gamma_right(), layout.gamma_left());
    let j = k.map(|z| z * g + z.conj() * gp);
    CouplingMatrixJ { j, k, gamma_right: g, gamma_left: gp }
}

/// Largest coupling that links atom `j` to the rest of the register:
/// off-diagonal entries of row and column `j`, and `Re J_jj` (the imaginary
/// part of `J_jj` cancels against its Hermitian conjugate).
pub fn decoupling_residual(j: &CouplingMatrixJ, atom: usize) -> f64 {
    let n = j.n_atoms();
    let off = (0..n)
        .filter(|&a| a != atom)
        .map(|a| j.j[(a, atom)].norm().max(j.j[(atom, a)].norm()))
        .fold(0.0, f64::max);
    off.max(j.j[(atom, atom)].re.abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambShift {
    /// Coefficient of `σ_z` in `H_eff`.
    pub sigma_z_coefficient: f64,
    /// `2 · coefficient / γ`, the sum of pairwise phase sines.
    pub sine_sum: f64,
}

/// Residual single-atom `σ_z` shift of a DF atom, read off the general
/// `𝓗` construction.
pub fn lamb_shift_check(layout: &Layout) -> Result<LambShift> {
    if layout.n_atoms() != 1 {
        return Err(Error::Precondition(format!("Lamb-shift check needs one atom, layout has {}", layout.n_atoms())));
    }
    if layout.gamma_left() != 0.0 || layout.gamma_right() <= 0.0 {
        return Err(Error::Precondition("Lamb-shift check needs gamma_right > 0 and gamma_left = 0".into()));
    }
    if !df_residual(layout, tolerance::DF_DEFAULT).is_df {
        return Err(Error::Precondition("Lamb-shift check needs a DF layout".into()));
    }
    let atoms = AtomRegister::new(1)?;
    let h = effective_hamiltonian(layout, &atoms)?;
    let coefficient = 0.5 * (h[(1, 1)] - h[(0, 0)]).re;
    Ok(LambShift { sigma_z_coefficient: coefficient, sine_sum: 2.0 * coefficient / layout.gamma_right() })
}

/// Second-order Magnus step `𝟙 − i(V̄ + 𝓗)dt − ½V̄²dt²` (not unitary).
pub fn magnus_step_unitary(layout: &Layout, space: &JointSpace, dt: f64) -> Result<OperatorMatrix> {
    let v = averaged_interaction(layout, space, dt)?;
    let h = second_order_h(layout, space)?;
    let id = OperatorMatrix::identity(space.dim());
    let first = (&v + &h) * C64::new(0.0, -dt);
    let second = (&v * &v) * (-0.5 * dt * dt);
    Ok(id + first + second)
}
