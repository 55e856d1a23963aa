// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! Subcollision generators, cascaded and simultaneous collision unitaries,
//! and the time-bin stream that produces atom trajectories.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::circuit::{self, CompileOptions};
use crate::effective::{
    averaged_interaction, check_space, effective_hamiltonian, magnus_step_unitary, point_operator, second_order_h,
    AtomRegister, BinRegister, JointSpace,
};
use crate::error::{Error, Result};
use crate::tensor::{self, expm_generator, permute_subsystems, DensityMatrix, OperatorMatrix, SubsystemDims};
use crate::tolerance;
use crate::topology::{classify_two_atom, df_residual, Layout, TwoAtomTopology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Right,
    Left,
}

/// `√(γ/dt)(S_ν b† + H.c.)` for `Right`, `√(γ'/dt)(S'_ν b'† + H.c.)` for `Left`.
pub fn point_generator(layout: &Layout, space: &JointSpace, nu: usize, direction: Direction, dt: f64) -> Result<OperatorMatrix> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    check_space(layout, space)?;
    let (s, b, rate) = match direction {
        Direction::Right => (point_operator(layout, space.atoms(), nu, false)?, space.b_right()?, layout.gamma_right()),
        Direction::Left => (point_operator(layout, space.atoms(), nu, true)?, space.b_left()?, layout.gamma_left()),
    };
    let a = space.lift_atom_operator(&s)? * b.dagger() * (rate / dt).sqrt();
    Ok(&a + a.dagger())
}

/// One cascaded slot. In bidirectional mode slot `k` couples right-going
/// point `k` together with left-going point `𝒩−1−k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubcollisionGen {
    pub nu: usize,
    pub left_nu: Option<usize>,
    pub generator: OperatorMatrix,
}

pub fn subcollision_generators(layout: &Layout, space: &JointSpace, dt: f64) -> Result<Vec<SubcollisionGen>> {
    let n = layout.n_points();
    (0..n)
        .map(|nu| {
            let mut generator = point_generator(layout, space, nu, Direction::Right, dt)?;
            let left_nu = space.bins().is_bidirectional().then_some(n - 1 - nu);
            if let Some(l) = left_nu {
                generator = generator + point_generator(layout, space, l, Direction::Left, dt)?;
            }
            Ok(SubcollisionGen { nu, left_nu, generator })
        })
        .collect()
}

/// Ordered product of slot exponentials, the first slot acting first.
pub fn cascaded_unitary(layout: &Layout, space: &JointSpace, dt: f64) -> Result<OperatorMatrix> {
    let gens = subcollision_generators(layout, space, dt)?;
    gens.iter().try_fold(OperatorMatrix::identity(space.dim()), |acc, g| {
        Ok(expm_generator(&g.generator, dt)? * acc)
    })
}

/// `exp(−i V̄ dt)`.
pub fn simultaneous_unitary(layout: &Layout, space: &JointSpace, dt: f64) -> Result<OperatorMatrix> {
    expm_generator(&averaged_interaction(layout, space, dt)?, dt)
}

/// `(i dt/2) Σ_{k>k'} [G_k', G_k]` over the cascaded slot generators.
pub fn commutator_sum(layout: &Layout, space: &JointSpace, dt: f64) -> Result<OperatorMatrix> {
    let gens = subcollision_generators(layout, space, dt)?;
    let mut acc = OperatorMatrix::zeros(space.dim());
    for (k, later) in gens.iter().enumerate() {
        for earlier in &gens[..k] {
            acc = acc + earlier.generator.commutator(&later.generator);
        }
    }
    Ok(acc * C64::new(0.0, 0.5 * dt))
}

/// Largest entry difference between two operators restricted to the rows
/// and columns in `indices`.
pub fn restricted_diff(a: &OperatorMatrix, b: &OperatorMatrix, indices: &[usize]) -> f64 {
    let d = a.restrict(indices, indices) - b.restrict(indices, indices);
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `a − b` over all rows and the vacuum-input columns.
pub fn vacuum_column_diff(a: &OperatorMatrix, b: &OperatorMatrix, space: &JointSpace) -> f64 {
    let cols = space.vacuum_indices();
    let rows: Vec<usize> = (0..space.dim()).collect();
    let d = a.restrict(&rows, &cols) - b.restrict(&rows, &cols);
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn require_df(layout: &Layout) -> Result<()> {
    let report = df_residual(layout, tolerance::DF_DEFAULT);
    if !report.is_df {
        return Err(Error::Precondition(format!(
            "layout is not DF (residuals {:?})",
            report.per_atom_residual
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagnusReport {
    pub err2: f64,
    pub err2_half: f64,
    /// `log₂(err2 / err2_half)`.
    pub order: f64,
}

/// Vacuum-input error `max |(U_cascaded − e^{−i𝓗dt}) (𝟙 ⊗ |0⟩)|`.
pub fn cascaded_vs_effective_error(layout: &Layout, space: &JointSpace, dt: f64) -> Result<f64> {
    require_df(layout)?;
    let u = cascaded_unitary(layout, space, dt)?;
    let e = expm_generator(&second_order_h(layout, space)?, dt)?;
    Ok(vacuum_column_diff(&u, &e, space))
}

/// Error at `dt` and `dt/2` and the fitted order. Only vacuum-input columns
/// are compared since fresh bins always enter in vacuum.
pub fn magnus_consistency(layout: &Layout, space: &JointSpace, dt: f64) -> Result<MagnusReport> {
    let err2 = cascaded_vs_effective_error(layout, space, dt)?;
    let err2_half = cascaded_vs_effective_error(layout, space, 0.5 * dt)?;
    Ok(MagnusReport { err2, err2_half, order: (err2 / err2_half).log2() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Cascaded,
    Simultaneous,
    /// Truncated Magnus step, trace renormalised after every step.
    MagnusLinear,
    /// `exp(−iH_eff dt)` on the atoms alone.
    Effective,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cascaded" => Ok(Self::Cascaded),
            "simultaneous" => Ok(Self::Simultaneous),
            "magnus" | "magnus-linear" => Ok(Self::MagnusLinear),
            "effective" => Ok(Self::Effective),
            other => Err(Error::Config(format!("unknown engine '{other}'"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cascaded => "cascaded",
            Self::Simultaneous => "simultaneous",
            Self::MagnusLinear => "magnus",
            Self::Effective => "effective",
        })
    }
}

/// State of each fresh bin entering a collision.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BinInput {
    #[default]
    Vacuum,
    Fock(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub layout: Layout,
    pub dt: f64,
    pub steps: usize,
    pub initial: DensityMatrix,
    pub bins: BinRegister,
    pub engine: Engine,
    pub bin_input: BinInput,
}

impl SimConfig {
    /// Cascaded engine, vacuum input, `d = 2` bins matched to the layout.
    pub fn new(layout: Layout, dt: f64, steps: usize, initial: DensityMatrix) -> Result<Self> {
        let bins = BinRegister::for_layout(&layout, 2)?;
        let cfg = Self { layout, dt, steps, initial, bins, engine: Engine::Cascaded, bin_input: BinInput::Vacuum };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        let atoms = AtomRegister::for_layout(&self.layout)?;
        if self.initial.dim() != atoms.dim() {
            return Err(Error::Config(format!(
                "initial state has dim {} but {} atoms need {}",
                self.initial.dim(),
                atoms.n_atoms(),
                atoms.dim()
            )));
        }
        let space = JointSpace::new(atoms, self.bins).map_err(|e| Error::Config(e.to_string()))?;
        check_space(&self.layout, &space)?;
        if let BinInput::Fock(n) = self.bin_input {
            let min_d = if self.bins.is_bidirectional() { self.bins.d_right().min(self.bins.d_left()) } else { self.bins.d_right() };
            if n >= min_d {
                return Err(Error::Config(format!("Fock input {n} does not fit bins of dim {min_d}")));
            }
        }
        let rate = self.layout.gamma_right().max(self.layout.gamma_left());
        if rate * self.dt > tolerance::COARSE_GRAIN_WARN {
            log::warn!(
                "gamma*dt = {:.3} exceeds {}; the coarse-grained picture is not reliable",
                rate * self.dt,
                tolerance::COARSE_GRAIN_WARN
            );
        }
        if !df_residual(&self.layout, tolerance::DF_DEFAULT).is_df {
            log::warn!("layout is not DF; the cascaded product is not claimed to equal the collision unitary");
        }
        Ok(())
    }

    pub fn space(&self) -> Result<JointSpace> {
        JointSpace::new(AtomRegister::for_layout(&self.layout)?, self.bins)
    }
}

/// Atom states sampled at `t_n = n dt`, `n = 0..=steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub populations: Vec<Vec<f64>>,
    pub purity: Vec<f64>,
    pub reference_distance: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn from_states(atoms: &AtomRegister, times: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Dimension("times and states differ in length".into()));
        }
        let populations = states.iter().map(|s| atoms.populations(s)).collect::<Result<_>>()?;
        let purity = states.iter().map(DensityMatrix::purity).collect();
        Ok(Self { times, states, populations, purity, reference_distance: None })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_atoms(&self) -> usize {
        self.populations.first().map_or(0, Vec::len)
    }

    /// Fills `reference_distance` with per-step trace distances to `other`.
    pub fn attach_reference(&mut self, other: &Trajectory) -> Result<()> {
        if other.len() != self.len() {
            return Err(Error::Dimension(format!(
                "reference has {} samples, trajectory has {}",
                other.len(),
                self.len()
            )));
        }
        let d = self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| tensor::trace_distance(a, b))
            .collect::<Result<_>>()?;
        self.reference_distance = Some(d);
        Ok(())
    }

    pub fn max_reference_distance(&self) -> Option<f64> {
        self.reference_distance.as_ref().map(|d| d.iter().copied().fold(0.0, f64::max))
    }

    pub fn min_purity(&self) -> f64 {
        self.purity.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_trace_defect(&self) -> f64 {
        self.states.iter().map(|s| (s.trace() - 1.0).abs()).fold(0.0, f64::max)
    }
}

enum StepMap {
    Joint { op: OperatorMatrix, renormalize: bool },
    Atoms(OperatorMatrix),
}

fn step_map(cfg: &SimConfig, space: &JointSpace) -> Result<StepMap> {
    Ok(match cfg.engine {
        Engine::Cascaded => StepMap::Joint { op: cascaded_unitary(&cfg.layout, space, cfg.dt)?, renormalize: false },
        Engine::Simultaneous => StepMap::Joint { op: simultaneous_unitary(&cfg.layout, space, cfg.dt)?, renormalize: false },
        Engine::MagnusLinear => StepMap::Joint { op: magnus_step_unitary(&cfg.layout, space, cfg.dt)?, renormalize: true },
        Engine::Effective => {
            let h = effective_hamiltonian(&cfg.layout, space.atoms())?;
            StepMap::Atoms(expm_generator(&h, cfg.dt)?)
        }
    })
}

/// Streams fresh bins through the atoms; see [`run_stream_observed`].
pub fn run_stream(cfg: &SimConfig) -> Result<Trajectory> {
    run_stream_observed(cfg, |_, _| {})
}

/// Like [`run_stream`], calling `hook(step, joint_state)` with the joint
/// atoms ⊗ bins state after each collision and before the bins are traced
/// out. For the `Effective` engine the hook sees the atom state.
pub fn run_stream_observed(cfg: &SimConfig, mut hook: impl FnMut(usize, &DensityMatrix)) -> Result<Trajectory> {
    cfg.validate()?;
    let space = cfg.space()?;
    let map = step_map(cfg, &space)?;
    let fresh = match cfg.bin_input {
        BinInput::Vacuum => cfg.bins.vacuum(),
        BinInput::Fock(n) => cfg.bins.fock(n)?,
    };
    let mut rho = cfg.initial.clone();
    let mut times = Vec::with_capacity(cfg.steps + 1);
    let mut states = Vec::with_capacity(cfg.steps + 1);
    times.push(0.0);
    states.push(rho.clone());
    for n in 1..=cfg.steps {
        rho = match &map {
            StepMap::Atoms(u) => {
                let next = rho.evolve(u);
                hook(n, &next);
                next
            }
            StepMap::Joint { op, renormalize } => {
                let mut joint = rho.tensor(&fresh)?.evolve(op);
                if *renormalize {
                    let tr = joint.trace();
                    joint = DensityMatrix::from_trusted(joint.into_operator() * (1.0 / tr));
                }
                hook(n, &joint);
                space.atoms_marginal(&joint)?
            }
        };
        times.push(n as f64 * cfg.dt);
        states.push(rho.clone());
    }
    Trajectory::from_states(space.atoms(), times, states)
}

/// Runs independent configurations in parallel; results keep input order.
pub fn run_sweep(configs: &[SimConfig]) -> Vec<Result<Trajectory>> {
    configs.par_iter().map(run_stream).collect()
}

/// Maximum bin-marginal deviation from vacuum seen over a cascaded run.
pub fn max_bin_deviation(cfg: &SimConfig) -> Result<(Trajectory, f64)> {
    let space = cfg.space()?;
    let vacuum = cfg.bins.vacuum();
    let mut worst = 0.0f64;
    let mut failure = None;
    let traj = run_stream_observed(cfg, |_, joint| match space.bins_marginal(joint) {
        Ok(m) => worst = worst.max(m.operator().max_diff(vacuum.operator())),
        Err(e) => failure = Some(e),
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok((traj, worst)),
    }
}

/// Streams a fresh mediator qubit through the braided circuit whose phase
/// kicks use angle `phi_m` instead of `π`, tracing the mediator out after
/// every step.
pub fn purity_probe(cfg: &SimConfig, phi_m: f64) -> Result<Trajectory> {
    cfg.validate()?;
    let layout = &cfg.layout;
    if layout.n_atoms() != 2 || classify_two_atom(layout)? != TwoAtomTopology::Braided {
        return Err(Error::Precondition("purity probe needs a braided two-atom layout".into()));
    }
    if !layout.is_unidirectional() {
        return Err(Error::Precondition("purity probe needs a unidirectional layout".into()));
    }
    require_df(layout)?;
    if !phi_m.is_finite() {
        return Err(Error::Precondition(format!("mediator phase must be finite, got {phi_m}")));
    }
    let opts = CompileOptions { mediator_phase: phi_m, ..CompileOptions::default() };
    let c = circuit::compile_braided_with(layout.gamma_right(), cfg.dt, &opts)?;
    let mut u = circuit::circuit_unitary(&c)?;
    let qubits = SubsystemDims::new(vec![2, 2, 2])?;
    if layout.points()[0].atom == 1 {
        u = permute_subsystems(&u, &qubits, &[0, 2, 1])?;
    }
    let gauge = circuit::atom_gauge(layout)?;
    let atoms = AtomRegister::new(2)?;
    let mediator0 = DensityMatrix::basis(2, 0)?;
    let mut rho = cfg.initial.evolve(&gauge);
    let mut times = vec![0.0];
    let mut states = vec![cfg.initial.clone()];
    for n in 1..=cfg.steps {
        let joint = mediator0.tensor(&rho)?.evolve(&u);
        rho = joint.partial_trace(&qubits, &[1, 2])?;
        times.push(n as f64 * cfg.dt);
        states.push(rho.evolve(&gauge.dagger()));
    }
    Trajectory::from_states(&atoms, times, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn braided(g: f64, gp: f64) -> Layout {
        Layout::equally_spaced(&[0, 1, 0, 1], FRAC_PI_2, g, gp).unwrap()
    }

    #[test]
    fn two_point_generators_are_opposite() {
        let l = Layout::from_phases(&[(0, 0.0), (0, PI)], 1.0, 0.0).unwrap();
        let space = JointSpace::for_layout(&l, 2).unwrap();
        let g = subcollision_generators(&l, &space, 0.01).unwrap();
        assert!((&g[0].generator + &g[1].generator).max_abs() < 1e-13);
        assert!(g[0].generator.is_hermitian(1e-12));
    }

    #[test]
    fn generators_sum_to_average() {
        for l in [braided(1.0, 0.0), braided(1.0, 0.4), Layout::from_phases(&[(0, 0.3), (1, 1.0), (0, 2.5)], 0.7, 0.2).unwrap()] {
            let space = JointSpace::for_layout(&l, 3).unwrap();
            let sum = subcollision_generators(&l, &space, 0.02)
                .unwrap()
                .into_iter()
                .fold(OperatorMatrix::zeros(space.dim()), |acc, g| acc + g.generator);
            let v = averaged_interaction(&l, &space, 0.02).unwrap();
            assert!(sum.max_diff(&v) < 1e-13);
        }
    }

    #[test]
    fn bidirectional_slot_pairing() {
        let l = braided(1.0, 0.5);
        let space = JointSpace::for_layout(&l, 2).unwrap();
        let g = subcollision_generators(&l, &space, 0.01).unwrap();
        let lefts: Vec<Option<usize>> = g.iter().map(|s| s.left_nu).collect();
        assert_eq!(lefts, vec![Some(3), Some(2), Some(1), Some(0)]);
    }

    #[test]
    fn trivial_topologies_give_identity() {
        for pattern in [[0, 0, 1, 1], [0, 1, 1, 0]] {
            let l = Layout::equally_spaced(&pattern, PI, 1.0, 0.0).unwrap();
            let space = JointSpace::for_layout(&l, 2).unwrap();
            let u = cascaded_unitary(&l, &space, 0.05).unwrap();
            assert!(u.max_diff(&OperatorMatrix::identity(space.dim())) < 1e-12);
        }
    }

    #[test]
    fn simultaneous_is_identity_for_df() {
        let l = braided(1.0, 0.0);
        let space = JointSpace::for_layout(&l, 2).unwrap();
        let u = simultaneous_unitary(&l, &space, 0.01).unwrap();
        assert!(u.max_diff(&OperatorMatrix::identity(space.dim())) < 1e-13);
        let c = cascaded_unitary(&l, &space, 0.01).unwrap();
        let diff = c.max_diff(&u);
        assert!(diff > 0.5 * 0.01 && diff < 2.0 * 0.01, "difference {diff}");
    }

    #[test]
    fn magnus_requires_df() {
        let l = Layout::from_phases(&[(0, 0.0)], 1.0, 0.0).unwrap();
        let space = JointSpace::for_layout(&l, 2).unwrap();
        assert!(matches!(magnus_consistency(&l, &space, 0.01), Err(Error::Precondition(_))));
    }

    #[test]
    fn engine_parsing() {
        assert_eq!("Cascaded".parse::<Engine>().unwrap(), Engine::Cascaded);
        assert_eq!("magnus".parse::<Engine>().unwrap(), Engine::MagnusLinear);
        assert_eq!(Engine::Effective.to_string().parse::<Engine>().unwrap(), Engine::Effective);
        assert!("rk4".parse::<Engine>().is_err());
    }

    #[test]
    fn config_validation() {
        let l = braided(1.0, 0.0);
        let atoms = AtomRegister::new(2).unwrap();
        let rho = atoms.product_state(&[true, false]).unwrap();
        assert!(SimConfig::new(l.clone(), 0.0, 10, rho.clone()).is_err());
        assert!(SimConfig::new(l.clone(), 0.01, 0, rho.clone()).is_err());
        assert!(SimConfig::new(l.clone(), 0.01, 10, DensityMatrix::basis(2, 0).unwrap()).is_err());
        let mut cfg = SimConfig::new(l, 0.01, 10, rho).unwrap();
        cfg.bin_input = BinInput::Fock(2);
        assert!(cfg.validate().is_err());
        cfg.bins = BinRegister::unidirectional(2000).unwrap();
        cfg.bin_input = BinInput::Vacuum;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn serial_stream_is_frozen() {
        let l = Layout::equally_spaced(&[0, 0, 1, 1], PI, 1.0, 0.0).unwrap();
        let rho = AtomRegister::new(2).unwrap().product_state(&[true, false]).unwrap();
        let traj = run_stream(&SimConfig::new(l, 0.01, 50, rho).unwrap()).unwrap();
        assert_eq!(traj.len(), 51);
        for (p, pur) in traj.populations.iter().zip(&traj.purity) {
            assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
            assert!((pur - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_preserves_order() {
        let rho = AtomRegister::new(2).unwrap().product_state(&[true, false]).unwrap();
        let cfgs: Vec<SimConfig> = [0.01, 0.02, 0.03]
            .iter()
            .map(|&dt| SimConfig::new(braided(1.0, 0.0), dt, 5, rho.clone()).unwrap())
            .collect();
        let out = run_sweep(&cfgs);
        for (cfg, t) in cfgs.iter().zip(out) {
            let t = t.unwrap();
            assert!((t.times[1] - cfg.dt).abs() < 1e-15);
        }
    }

    #[test]
    fn magnus_engine_keeps_trace() {
        let l = Layout::from_phases(&[(0, 0.0), (1, 0.4)], 1.0, 0.0).unwrap();
        let rho = AtomRegister::new(2).unwrap().product_state(&[true, false]).unwrap();
        let cfg = SimConfig::new(l, 0.01, 20, rho).unwrap().with_engine(Engine::MagnusLinear);
        let t = run_stream(&cfg).unwrap();
        assert!(t.max_trace_defect() < 1e-9);
    }
}
