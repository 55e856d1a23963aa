// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! Small-atom contrast model: atoms coupled far off resonance to a few
//! discrete modes. The interaction averages out over a coarse-grained
//! window and leaves the dispersive effective Hamiltonian.
//!
//! Frame: rotating at the atomic frequency, so the full Hamiltonian is
//! `Σ_k Δ_k b_k†b_k + Σ_jk (g_jk σ_j b_k† + H.c.)` and the interaction
//! picture coupling is `V_t = Σ_jk (g_jk σ_j b_k† e^{iΔ_k t} + H.c.)`.

use num_complex::Complex64 as C64;

use crate::collision::Trajectory;
use crate::effective::AtomRegister;
use crate::error::{Error, Result};
use crate::tensor::{self, annihilation, embed, pauli, DensityMatrix, HermitianSpectrum, Matrix, OperatorMatrix, SubsystemDims};
use crate::tolerance;

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    detunings: Vec<f64>,
    /// Atoms × modes.
    couplings: Matrix,
    fock_dim: usize,
}

impl ModeSet {
    /// `couplings[j][k]` couples atom `j` to mode `k`.
    pub fn new(detunings: Vec<f64>, couplings: Vec<Vec<C64>>, fock_dim: usize) -> Result<Self> {
        if detunings.is_empty() || couplings.is_empty() {
            return Err(Error::Config("need at least one mode and one atom".into()));
        }
        if let Some(d) = detunings.iter().find(|d| !d.is_finite()) {
            return Err(Error::Config(format!("non-finite detuning {d}")));
        }
        if detunings.contains(&0.0) {
            return Err(Error::Singular("zero detuning makes the dispersive terms singular".into()));
        }
        if couplings.iter().any(|row| row.len() != detunings.len()) {
            return Err(Error::Config("coupling rows must have one entry per mode".into()));
        }
        if couplings.iter().flatten().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::Config("non-finite coupling".into()));
        }
        if fock_dim < 2 {
            return Err(Error::Config(format!("mode truncation must be >= 2, got {fock_dim}")));
        }
        let m = Matrix::from_fn(couplings.len(), detunings.len(), |j, k| couplings[j][k]);
        let set = Self { detunings, couplings: m, fock_dim };
        SubsystemDims::new(set.factor_dims())?;
        Ok(set)
    }

    /// One atom, one mode, real coupling.
    pub fn single(g: f64, delta: f64, fock_dim: usize) -> Result<Self> {
        Self::new(vec![delta], vec![vec![C64::new(g, 0.0)]], fock_dim)
    }

    pub fn n_atoms(&self) -> usize {
        self.couplings.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.detunings.len()
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn coupling(&self, j: usize, k: usize) -> C64 {
        self.couplings[(j, k)]
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn max_coupling(&self) -> f64 {
        self.couplings.iter().map(|g| g.norm()).fold(0.0, f64::max)
    }

    pub fn min_detuning(&self) -> f64 {
        self.detunings.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min)
    }

    /// `min|Δ_k| ≥ 20 max|g_jk|`.
    pub fn is_dispersive(&self) -> bool {
        self.min_detuning() >= tolerance::DISPERSIVE_RATIO * self.max_coupling()
    }

    /// Same couplings, every detuning multiplied by `factor`.
    pub fn scaled_detunings(&self, factor: f64) -> Result<Self> {
        let rows: Vec<Vec<C64>> = (0..self.n_atoms())
            .map(|j| (0..self.n_modes()).map(|k| self.coupling(j, k)).collect())
            .collect();
        Self::new(self.detunings.iter().map(|d| d * factor).collect(), rows, self.fock_dim)
    }

    /// Atoms first, then modes.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut d = vec![2; self.n_atoms()];
        d.extend(std::iter::repeat_n(self.fock_dim, self.n_modes()));
        d
    }

    fn dims(&self) -> Result<SubsystemDims> {
        SubsystemDims::new(self.factor_dims())
    }

    fn atom_lowering(&self, j: usize) -> Result<OperatorMatrix> {
        embed(&pauli::lowering(), &self.dims()?, j)
    }

    fn mode_annihilation(&self, k: usize) -> Result<OperatorMatrix> {
        embed(&annihilation(self.fock_dim), &self.dims()?, self.n_atoms() + k)
    }

    fn check_atoms(&self, atoms: &AtomRegister) -> Result<()> {
        if atoms.n_atoms() != self.n_atoms() {
            return Err(Error::Dimension(format!(
                "mode set couples {} atoms, register has {}",
                self.n_atoms(),
                atoms.n_atoms()
            )));
        }
        Ok(())
    }
}

/// `(1/dt) ∫_{t0}^{t0+dt} V_s ds` on atoms ⊗ modes, integrated analytically.
pub fn windowed_average(modes: &ModeSet, t0: f64, dt: f64) -> Result<OperatorMatrix> {
    if !(dt.is_finite() && dt > 0.0 && t0.is_finite()) {
        return Err(Error::Config(format!("window needs finite t0 and dt > 0, got t0={t0}, dt={dt}")));
    }
    let shift = modes.max_coupling().powi(2) / modes.min_detuning();
    if modes.min_detuning() * dt < 10.0 || shift * dt > 0.1 {
        log::warn!("window dt = {dt} is not well separated from 1/|Δ| and the dispersive time scale");
    }
    let dim = modes.dims()?.total();
    let mut a = OperatorMatrix::zeros(dim);
    for k in 0..modes.n_modes() {
        let delta = modes.detunings[k];
        // (1/dt)∫ e^{iΔs} ds
        let avg = (C64::from_polar(1.0, delta * (t0 + dt)) - C64::from_polar(1.0, delta * t0)) / C64::new(0.0, delta * dt);
        let bk = modes.mode_annihilation(k)?;
        for j in 0..modes.n_atoms() {
            let g = modes.coupling(j, k);
            if g.norm() == 0.0 {
                continue;
            }
            a = a + modes.atom_lowering(j)? * bk.dagger() * (g * avg);
        }
    }
    Ok(&a + a.dagger())
}

fn require_dispersive(modes: &ModeSet) -> Result<()> {
    if !modes.is_dispersive() {
        return Err(Error::Precondition(format!(
            "not dispersive: min|Δ| = {} < {} max|g| = {}",
            modes.min_detuning(),
            tolerance::DISPERSIVE_RATIO,
            tolerance::DISPERSIVE_RATIO * modes.max_coupling()
        )));
    }
    Ok(())
}

/// Vacuum-sector effective Hamiltonian
/// `−Σ_{jj'k} g_jk g*_j'k/(2Δ_k) σ_j'†σ_j + H.c.` on the atoms.
pub fn dispersive_heff(modes: &ModeSet, atoms: &AtomRegister) -> Result<OperatorMatrix> {
    modes.check_atoms(atoms)?;
    require_dispersive(modes)?;
    let mut h = OperatorMatrix::zeros(atoms.dim());
    for k in 0..modes.n_modes() {
        for j in 0..modes.n_atoms() {
            for jp in 0..modes.n_atoms() {
                let c = -modes.coupling(j, k) * modes.coupling(jp, k).conj() / (2.0 * modes.detunings[k]);
                h = h + atoms.raising(jp)? * atoms.lowering(j)? * c;
            }
        }
    }
    Ok(&h + h.dagger())
}

/// Full second-order generator on atoms ⊗ modes: the vacuum part above plus
/// `−Σ_j Σ'_{kk'} g_jk g*_jk'/Δ_k σ_z,j b_k†b_k'`, the primed sum running
/// over pairs of exactly degenerate modes (including `k = k'`).
pub fn dispersive_generator(modes: &ModeSet) -> Result<OperatorMatrix> {
    let atoms = AtomRegister::new(modes.n_atoms())?;
    let vac = dispersive_heff(modes, &atoms)?;
    let dims = modes.dims()?;
    let mode_dim: usize = dims.as_slice()[modes.n_atoms()..].iter().product();
    let mut h = tensor::kron(&vac, &OperatorMatrix::identity(mode_dim))?;
    for j in 0..modes.n_atoms() {
        let sz = embed(&pauli::z(), &dims, j)?;
        for k in 0..modes.n_modes() {
            for kp in 0..modes.n_modes() {
                if modes.detunings[k] != modes.detunings[kp] {
                    continue;
                }
                let c = -modes.coupling(j, k) * modes.coupling(j, kp).conj() / modes.detunings[k];
                h = h + &sz * modes.mode_annihilation(k)?.dagger() * modes.mode_annihilation(kp)? * c;
            }
        }
    }
    Ok(h)
}

/// `Σ_k Δ_k b_k†b_k + Σ_jk (g_jk σ_j b_k† + H.c.)` on atoms ⊗ modes.
pub fn full_hamiltonian(modes: &ModeSet) -> Result<OperatorMatrix> {
    let dims = modes.dims()?;
    let mut h = OperatorMatrix::zeros(dims.total());
    for k in 0..modes.n_modes() {
        let b = modes.mode_annihilation(k)?;
        h = h + b.dagger() * &b * modes.detunings[k];
        let mut a = OperatorMatrix::zeros(dims.total());
        for j in 0..modes.n_atoms() {
            a = a + modes.atom_lowering(j)? * b.dagger() * modes.coupling(j, k);
        }
        h = h + &a + a.dagger();
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersiveComparison {
    pub exact: Trajectory,
    pub effective: Trajectory,
    pub max_population_deviation: f64,
}

/// Evolves `initial ⊗ |0…0⟩` under the full Hamiltonian and `initial`
/// under [`dispersive_heff`], sampling at `t_n = n·t_end/samples`.
pub fn exact_vs_effective(modes: &ModeSet, initial: &DensityMatrix, t_end: f64, samples: usize) -> Result<DispersiveComparison> {
    let atoms = AtomRegister::new(modes.n_atoms())?;
    if initial.dim() != atoms.dim() {
        return Err(Error::Dimension(format!("initial state dim {} for {} atoms", initial.dim(), atoms.n_atoms())));
    }
    if !(t_end.is_finite() && t_end > 0.0) || samples == 0 {
        return Err(Error::Config("need t_end > 0 and at least one sample".into()));
    }
    let dims = modes.dims()?;
    let atom_sites: Vec<usize> = (0..modes.n_atoms()).collect();
    let mode_dim = dims.total() / atoms.dim();
    let joint0 = initial.tensor(&DensityMatrix::basis(mode_dim, 0)?)?;
    let full = HermitianSpectrum::of(&full_hamiltonian(modes)?)?;
    let eff = HermitianSpectrum::of(&dispersive_heff(modes, &atoms)?)?;

    let times: Vec<f64> = (0..=samples).map(|n| t_end * n as f64 / samples as f64).collect();
    let mut exact = Vec::with_capacity(times.len());
    let mut effective = Vec::with_capacity(times.len());
    for &t in &times {
        exact.push(joint0.evolve(&full.propagator(t)).partial_trace(&dims, &atom_sites)?);
        effective.push(initial.evolve(&eff.propagator(t)));
    }
    let exact = Trajectory::from_states(&atoms, times.clone(), exact)?;
    let effective = Trajectory::from_states(&atoms, times, effective)?;
    let max_population_deviation = exact
        .populations
        .iter()
        .zip(&effective.populations)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    Ok(DispersiveComparison { exact, effective, max_population_deviation })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeComparison {
    /// Half the single-excitation splitting that involves the dark state,
    /// from exact diagonalisation of two atoms and one shared mode.
    pub exact_half_splitting: f64,
    /// `|⟨g,e|H_eff|e,g⟩|`.
    pub effective_coupling: f64,
    /// `g²/Δ`.
    pub analytic: f64,
}

/// Two atoms sharing one mode with equal real coupling `g`.
pub fn two_atom_exchange(g: f64, delta: f64, fock_dim: usize) -> Result<ExchangeComparison> {
    let gc = C64::new(g, 0.0);
    let modes = ModeSet::new(vec![delta], vec![vec![gc], vec![gc]], fock_dim)?;
    let atoms = AtomRegister::new(2)?;
    let heff = dispersive_heff(&modes, &atoms)?;
    let eg = atoms.basis_index(&[true, false])?;
    let ge = atoms.basis_index(&[false, true])?;
    let effective_coupling = heff[(ge, eg)].norm();

    // single-excitation sector: |e,g,0⟩, |g,e,0⟩, |g,g,1⟩
    let dims = modes.dims()?;
    let sector: Vec<usize> = [[1, 0, 0], [0, 1, 0], [0, 0, 1]].iter().map(|d| dims.compose(d)).collect();
    let h = full_hamiltonian(&modes)?;
    let block = OperatorMatrix::new(h.restrict(&sector, &sector))?;
    let e = tensor::hermitian_eigenvalues(&block)?;
    // dark state sits at zero; the dressed bright state is the eigenvalue of
    // smaller magnitude among the other two
    let dark = e.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())).expect("three eigenvalues");
    let bright = e
        .iter()
        .copied()
        .filter(|&x| x != dark)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .expect("three eigenvalues");
    Ok(ExchangeComparison {
        exact_half_splitting: 0.5 * (bright - dark).abs(),
        effective_coupling,
        analytic: g * g / delta.abs(),
    })
}
