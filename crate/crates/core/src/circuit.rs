// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate-circuit form of the braided collision: a mediator qubit `M`
//! (the time bin truncated to one photon) shuttles between the two atoms
//! through parametric XY gates, with a phase kick on `M` after each round.
//!
//! Qubit order is fixed as `q[0] = M`, `q[1] = A0`, `q[2] = A1`, with `M`
//! the most significant tensor factor.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::collision::cascaded_unitary;
use crate::effective::JointSpace;
use crate::error::{Error, Result};
use crate::tensor::{self, annihilation, embed, expm_generator, pauli, OperatorMatrix, SubsystemDims};
use crate::tolerance;
use crate::topology::{classify_two_atom, df_residual, Layout, TwoAtomTopology};

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    /// Exchange gate with inner block angle `πδ`.
    Xy { a: usize, b: usize, delta: f64 },
    /// `rz(θ) = diag(e^{−iθ/2}, e^{iθ/2})`.
    PhaseZ { target: usize, theta: f64 },
    /// Arbitrary two-qubit unitary, `a` being its first factor.
    U4 { a: usize, b: usize, matrix: OperatorMatrix },
}

impl Gate {
    fn targets(&self) -> Vec<usize> {
        match self {
            Gate::Xy { a, b, .. } | Gate::U4 { a, b, .. } => vec![*a, *b],
            Gate::PhaseZ { target, .. } => vec![*target],
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let t = self.targets();
        if let Some(q) = t.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::Circuit(format!("target q[{q}] out of range for {n_qubits} qubits")));
        }
        if t.len() == 2 && t[0] == t[1] {
            return Err(Error::Circuit(format!("two-qubit gate on repeated target q[{}]", t[0])));
        }
        match self {
            Gate::Xy { a, b, delta } => {
                if *a != 0 && *b != 0 {
                    return Err(Error::Circuit("xy gate must act on the mediator q[0]".into()));
                }
                if !delta.is_finite() {
                    return Err(Error::Circuit(format!("non-finite delta {delta}")));
                }
            }
            Gate::PhaseZ { theta, .. } if !theta.is_finite() => {
                return Err(Error::Circuit(format!("non-finite theta {theta}")));
            }
            Gate::U4 { matrix, .. } => {
                if matrix.dim() != 4 {
                    return Err(Error::Circuit(format!("u4 matrix has dim {}", matrix.dim())));
                }
                if matrix.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::Circuit("u4 matrix has non-finite entries".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || 1usize.checked_shl(n_qubits as u32).is_none_or(|d| d > tolerance::MAX_DIM) {
            return Err(Error::Circuit(format!("unsupported qubit count {n_qubits}")));
        }
        Ok(Self { n_qubits, gates: Vec::new() })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

pub fn xy_matrix(delta: f64) -> OperatorMatrix {
    let (s, c) = (PI * delta).sin_cos();
    let mut m = OperatorMatrix::identity(4).into_matrix();
    m[(1, 1)] = C64::new(c, 0.0);
    m[(2, 2)] = C64::new(c, 0.0);
    m[(1, 2)] = C64::new(0.0, -s);
    m[(2, 1)] = C64::new(0.0, -s);
    OperatorMatrix::new(m).expect("square")
}

pub fn rz_matrix(theta: f64) -> OperatorMatrix {
    OperatorMatrix::diagonal(&[C64::from_polar(1.0, -0.5 * theta), C64::from_polar(1.0, 0.5 * theta)])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompileOptions {
    /// Permit `γdt` above the guard value.
    pub allow_out_of_range: bool,
    /// Angle of the two mediator phase kicks.
    pub mediator_phase: f64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { allow_out_of_range: false, mediator_phase: PI }
    }
}

/// `XY(M,A0), XY(M,A1), rz(π) M, XY(M,A0), XY(M,A1), rz(π) M` with
/// `δ = √(γdt)/π`.
pub fn compile_braided(gamma: f64, dt: f64) -> Result<Circuit> {
    compile_braided_with(gamma, dt, &CompileOptions::default())
}

pub fn compile_braided_with(gamma: f64, dt: f64, opts: &CompileOptions) -> Result<Circuit> {
    let x = gamma * dt;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Circuit(format!("gamma*dt must be positive, got {x}")));
    }
    if x > tolerance::CIRCUIT_MAX_GAMMA_DT && !opts.allow_out_of_range {
        return Err(Error::Circuit(format!(
            "gamma*dt = {x} exceeds {} (use the override to compile anyway)",
            tolerance::CIRCUIT_MAX_GAMMA_DT
        )));
    }
    let delta = x.sqrt() / PI;
    let mut c = Circuit::new(3)?;
    for _ in 0..2 {
        c.push(Gate::Xy { a: 0, b: 1, delta })?;
        c.push(Gate::Xy { a: 0, b: 2, delta })?;
        c.push(Gate::PhaseZ { target: 0, theta: opts.mediator_phase })?;
    }
    Ok(c)
}

/// Places a two-qubit gate (first factor on `a`) on an `n`-qubit register.
fn embed_two(g: &OperatorMatrix, n: usize, a: usize, b: usize) -> Result<OperatorMatrix> {
    let dims = SubsystemDims::new(vec![2; n])?;
    let dim = dims.total();
    let mut out = OperatorMatrix::zeros(dim).into_matrix();
    for col in 0..dim {
        let d = dims.digits(col);
        let local_col = 2 * d[a] + d[b];
        for local_row in 0..4 {
            let mut rd = d.clone();
            rd[a] = local_row / 2;
            rd[b] = local_row % 2;
            out[(dims.compose(&rd), col)] = g[(local_row, local_col)];
        }
    }
    OperatorMatrix::new(out)
}

fn gate_unitary(gate: &Gate, n: usize) -> Result<OperatorMatrix> {
    match gate {
        Gate::Xy { a, b, delta } => embed_two(&xy_matrix(*delta), n, *a, *b),
        Gate::U4 { a, b, matrix } => embed_two(matrix, n, *a, *b),
        Gate::PhaseZ { target, theta } => embed(&rz_matrix(*theta), &SubsystemDims::new(vec![2; n])?, *target),
    }
}

/// Product of the gate matrices, first gate acting first.
pub fn circuit_unitary(c: &Circuit) -> Result<OperatorMatrix> {
    let dim = 1usize << c.n_qubits;
    c.gates.iter().try_fold(OperatorMatrix::identity(dim), |acc, g| {
        g.validate(c.n_qubits)?;
        Ok(gate_unitary(g, c.n_qubits)? * acc)
    })
}

/// `N = ⌊1/(γdt)⌋` rounds for a full iSWAP.
pub fn iswap_iterations(gamma: f64, dt: f64) -> Result<usize> {
    let x = gamma * dt;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Precondition(format!("gamma*dt must be positive, got {x}")));
    }
    Ok((1.0 / x + 1e-9).floor() as usize)
}

fn qubit_label(q: usize) -> String {
    if q == 0 {
        "M".into()
    } else {
        format!("A{}", q - 1)
    }
}

pub fn emit_text(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n#", c.n_qubits);
    for q in 0..c.n_qubits {
        let _ = write!(out, " q[{q}]={}", qubit_label(q));
    }
    out.push('\n');
    for g in &c.gates {
        match g {
            Gate::Xy { a, b, delta } => {
                let _ = writeln!(out, "xy q[{a}],q[{b}] delta={delta:.16e}");
            }
            Gate::PhaseZ { target, theta } => {
                let _ = writeln!(out, "rz q[{target}] theta={theta:.16e}");
            }
            Gate::U4 { a, b, matrix } => {
                let entries: Vec<String> = (0..4)
                    .flat_map(|i| (0..4).map(move |j| (i, j)))
                    .map(|(i, j)| format!("{:.16e},{:.16e}", matrix[(i, j)].re, matrix[(i, j)].im))
                    .collect();
                let _ = writeln!(out, "u4 q[{a}],q[{b}] m={}", entries.join(","));
            }
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_qubit(s: &str, line: usize) -> Result<usize> {
    s.strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| parse_err(line, format!("bad qubit '{s}'")))
}

fn parse_param<'a>(s: &'a str, key: &str, line: usize) -> Result<&'a str> {
    s.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| parse_err(line, format!("expected '{key}=...', got '{s}'")))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| parse_err(line, format!("bad number '{s}'")))
}

/// Inverse of [`emit_text`].
pub fn parse_text(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = l.split_whitespace().collect();
        let Some(c) = circuit.as_mut() else {
            match tokens.as_slice() {
                ["qubits", n] => {
                    let n: usize = n.parse().map_err(|_| parse_err(line, format!("bad qubit count '{n}'")))?;
                    circuit = Some(Circuit::new(n).map_err(|e| parse_err(line, e.to_string()))?);
                    continue;
                }
                _ => return Err(parse_err(line, "expected 'qubits <n>' header")),
            }
        };
        let gate = match tokens.as_slice() {
            ["xy", qs, p] | ["u4", qs, p] => {
                let (qa, qb) = qs.split_once(',').ok_or_else(|| parse_err(line, "expected two targets"))?;
                let (a, b) = (parse_qubit(qa, line)?, parse_qubit(qb, line)?);
                if tokens[0] == "xy" {
                    Gate::Xy { a, b, delta: parse_f64(parse_param(p, "delta", line)?, line)? }
                } else {
                    let nums: Vec<f64> = parse_param(p, "m", line)?
                        .split(',')
                        .map(|x| parse_f64(x, line))
                        .collect::<Result<_>>()?;
                    if nums.len() != 32 {
                        return Err(parse_err(line, format!("u4 needs 32 numbers, got {}", nums.len())));
                    }
                    let matrix = OperatorMatrix::from_fn(4, |i, j| C64::new(nums[2 * (4 * i + j)], nums[2 * (4 * i + j) + 1]));
                    Gate::U4 { a, b, matrix }
                }
            }
            ["rz", q, p] => Gate::PhaseZ { target: parse_qubit(q, line)?, theta: parse_f64(parse_param(p, "theta", line)?, line)? },
            _ => return Err(parse_err(line, format!("unrecognised gate line '{l}'"))),
        };
        c.push(gate).map_err(|e| parse_err(line, e.to_string()))?;
    }
    circuit.ok_or_else(|| parse_err(0, "missing 'qubits <n>' header"))
}

/// Exact slot exponentials of a unidirectional layout as `u4` gates on
/// `(M, A_j)`, with the bin truncated to a qubit.
pub fn compile_general(layout: &Layout, dt: f64) -> Result<Circuit> {
    if !layout.is_unidirectional() {
        return Err(Error::Precondition("compile-general supports unidirectional layouts only".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Circuit(format!("dt must be positive, got {dt}")));
    }
    let mut c = Circuit::new(layout.n_atoms() + 1)?;
    let b = annihilation(2);
    let rate = (layout.gamma_right() / dt).sqrt();
    for p in layout.points() {
        let a = tensor::kron(&b.dagger(), &pauli::lowering())? * C64::from_polar(rate, -p.phase);
        let g = &a + a.dagger();
        c.push(Gate::U4 { a: 0, b: p.atom + 1, matrix: expm_generator(&g, dt)? })?;
    }
    Ok(c)
}

/// `⊗_j diag(1, e^{−iφ_{j,1}})`, the local gauge that removes each atom's
/// first-leg phase.
pub fn atom_gauge(layout: &Layout) -> Result<OperatorMatrix> {
    let factors: Vec<OperatorMatrix> = (0..layout.n_atoms())
        .map(|j| {
            let phi = layout.atom_phases(j)[0];
            OperatorMatrix::diagonal(&[C64::new(1.0, 0.0), C64::from_polar(1.0, -phi)])
        })
        .collect();
    let refs: Vec<&OperatorMatrix> = factors.iter().collect();
    tensor::kron_all(&refs)
}

/// Cascaded unitary of a braided DF layout (`d = 2` bin) in the circuit's
/// gauge and qubit order, `q[1]` being the atom met first.
pub fn cascaded_in_circuit_frame(layout: &Layout, dt: f64) -> Result<OperatorMatrix> {
    if layout.n_atoms() != 2 || classify_two_atom(layout)? != TwoAtomTopology::Braided || !layout.is_unidirectional() {
        return Err(Error::Precondition("expected a unidirectional braided two-atom layout".into()));
    }
    if !df_residual(layout, tolerance::DF_DEFAULT).is_df {
        return Err(Error::Precondition("expected a DF layout".into()));
    }
    let space = JointSpace::for_layout(layout, 2)?;
    let u = cascaded_unitary(layout, &space, dt)?;
    let g = tensor::kron(&atom_gauge(layout)?, &OperatorMatrix::identity(2))?;
    let aligned = &g * u * g.dagger();
    let first = layout.points()[0].atom;
    tensor::permute_subsystems(&aligned, space.dims(), &[2, first, 1 - first])
}

/// Largest amplitude that flips the mediator (`q[0]`) between `|0⟩` and `|1⟩`.
pub fn mediator_flip_amplitude(u: &OperatorMatrix) -> f64 {
    let half = u.dim() / 2;
    let lo: Vec<usize> = (0..half).collect();
    let hi: Vec<usize> = (half..u.dim()).collect();
    let up = u.restrict(&hi, &lo);
    let down = u.restrict(&lo, &hi);
    up.iter().chain(down.iter()).map(|z| z.norm()).fold(0.0, f64::max)
}

/// Atom block `⟨m_M| U |m_M⟩`.
pub fn mediator_block(u: &OperatorMatrix, m: usize) -> Result<OperatorMatrix> {
    let half = u.dim() / 2;
    if m > 1 {
        return Err(Error::Circuit(format!("mediator level {m} out of range")));
    }
    let idx: Vec<usize> = (m * half..(m + 1) * half).collect();
    OperatorMatrix::new(u.restrict(&idx, &idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xy_limits() {
        assert!(xy_matrix(0.0).max_diff(&OperatorMatrix::identity(4)) < 1e-15);
        let m = xy_matrix(0.5);
        assert!((m[(1, 2)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(m[(1, 1)].norm() < 1e-15);
        assert!(m.is_unitary(1e-14));
    }

    #[test]
    fn braided_layout_of_gates() {
        let c = compile_braided(1.0, 0.01).unwrap();
        assert_eq!(c.len(), 6);
        match c.gates()[0] {
            Gate::Xy { a: 0, b: 1, delta } => assert!((delta - 0.1 / PI).abs() < 1e-15),
            ref g => panic!("unexpected first gate {g:?}"),
        }
        assert!(matches!(c.gates()[2], Gate::PhaseZ { target: 0, .. }));
        assert!(matches!(c.gates()[4], Gate::Xy { a: 0, b: 2, .. }));
        assert!(compile_braided(1.0, 0.3).is_err());
        let opts = CompileOptions { allow_out_of_range: true, ..CompileOptions::default() };
        assert_eq!(compile_braided_with(1.0, 0.3, &opts).unwrap().len(), 6);
        assert!(compile_braided(1.0, 0.0).is_err());
    }

    #[test]
    fn unitary_of_simple_circuits() {
        let c = Circuit::new(3).unwrap();
        assert!(circuit_unitary(&c).unwrap().max_diff(&OperatorMatrix::identity(8)) < 1e-15);
        let mut c = Circuit::new(3).unwrap();
        c.push(Gate::PhaseZ { target: 0, theta: PI }).unwrap();
        c.push(Gate::PhaseZ { target: 0, theta: PI }).unwrap();
        let u = circuit_unitary(&c).unwrap();
        assert!(tensor::max_diff_up_to_phase(&u, &OperatorMatrix::identity(8)) < 1e-15);
    }

    #[test]
    fn bad_targets_rejected() {
        let mut c = Circuit::new(3).unwrap();
        assert!(c.push(Gate::Xy { a: 1, b: 2, delta: 0.1 }).is_err());
        assert!(c.push(Gate::Xy { a: 0, b: 3, delta: 0.1 }).is_err());
        assert!(c.push(Gate::PhaseZ { target: 0, theta: f64::NAN }).is_err());
        assert!(c.push(Gate::U4 { a: 1, b: 1, matrix: OperatorMatrix::identity(4) }).is_err());
    }

    #[test]
    fn iteration_counts() {
        assert_eq!(iswap_iterations(1.0, 0.01).unwrap(), 100);
        assert_eq!(iswap_iterations(1.0, 1.0 / 3.0).unwrap(), 3);
        assert!(iswap_iterations(1.0, 0.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let empty = Circuit::new(3).unwrap();
        assert_eq!(emit_text(&empty), "qubits 3\n# q[0]=M q[1]=A0 q[2]=A1\n");
        let c = compile_braided(1.0, 0.01).unwrap();
        let text = emit_text(&c);
        assert_eq!(text.lines().count(), 8);
        assert_eq!(parse_text(&text).unwrap(), c);
        let l = Layout::from_phases(&[(0, 0.2), (1, 1.1), (0, 0.2 + PI)], 1.0, 0.0).unwrap();
        let g = compile_general(&l, 0.05).unwrap();
        assert_eq!(parse_text(&emit_text(&g)).unwrap(), g);
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(parse_text("xy q[0],q[1] delta=1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_text("qubits 3\n\nrz q[0] angle=1"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_text("qubits 3\nxy q[1],q[2] delta=1"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_text("").is_err());
    }

    #[test]
    fn general_compile_matches_cascaded() {
        let l = Layout::from_phases(&[(0, 0.2), (1, 1.1), (0, 0.2 + PI), (1, 2.0)], 1.0, 0.0).unwrap();
        let dt = 0.02;
        let u = circuit_unitary(&compile_general(&l, dt).unwrap()).unwrap();
        let space = JointSpace::for_layout(&l, 2).unwrap();
        let casc = cascaded_unitary(&l, &space, dt).unwrap();
        let casc = tensor::permute_subsystems(&casc, space.dims(), &[2, 0, 1]).unwrap();
        assert!(u.max_diff(&casc) < 1e-12);
    }

    #[test]
    fn mediator_helpers() {
        let id = OperatorMatrix::identity(8);
        assert_eq!(mediator_flip_amplitude(&id), 0.0);
        let mut c = Circuit::new(3).unwrap();
        c.push(Gate::Xy { a: 0, b: 1, delta: 0.5 }).unwrap();
        let u = circuit_unitary(&c).unwrap();
        assert!((mediator_flip_amplitude(&u) - 1.0).abs() < 1e-15);
        assert_eq!(mediator_block(&id, 1).unwrap().dim(), 4);
        assert!(mediator_block(&id, 2).is_err());
    }
}
