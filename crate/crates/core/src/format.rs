// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! Plain-text layout and simulation configs, and CSV writers.
//!
//! Config grammar (one item per line, `#` starts a comment):
//!
//! ```text
//! [layout]                     # optional when the file is a bare layout
//! k0 = 1.0                     # only with x= points
//! gamma_right = 1.0
//! gamma_left = 0.0
//! point atom=0 phase=0
//! point atom=1 phase=pi/2      # or x=<float>; never mixed in one file
//!
//! [simulation]
//! dt = 0.01
//! steps = 314
//! engine = cascaded            # cascaded | simultaneous | magnus | effective
//! d_right = 2
//! d_left = 2                   # bidirectional layouts only
//! initial = eg                 # one e/g letter per atom
//! bin_input = vacuum           # or fock:<n>
//! reference = effective        # or none
//! ```
//!
//! Numbers accept `pi` multiples such as `3pi/2`, `-pi/4` or `2*pi/3`.

use std::fmt::Write as _;

use crate::collision::{BinInput, Engine, SimConfig, Trajectory};
use crate::effective::{AtomRegister, BinRegister};
use crate::error::{Error, Result};
use crate::tensor::Matrix;
use crate::topology::{phases_from_positions, Layout, Position};

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses a float or a multiple of `pi`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(at) = s.find("pi") else {
        return s.parse().ok();
    };
    let (head, tail) = (&s[..at], &s[at + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().ok()?,
    };
    let div = match tail {
        "" => 1.0,
        t => t.strip_prefix('/')?.parse::<f64>().ok()?,
    };
    Some(coef * std::f64::consts::PI / div)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Layout,
    Simulation,
}

struct Line<'a> {
    number: usize,
    section: Section,
    text: &'a str,
}

fn lines(text: &str) -> Result<Vec<Line<'_>>> {
    let mut section = Section::Layout;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            section = match name.trim() {
                "layout" => Section::Layout,
                "simulation" => Section::Simulation,
                other => return Err(perr(number, format!("unknown section [{other}]"))),
            };
            continue;
        }
        out.push(Line { number, section, text: l });
    }
    Ok(out)
}

fn key_value(line: &Line<'_>) -> Result<(String, String)> {
    let (k, v) = line
        .text
        .split_once('=')
        .ok_or_else(|| perr(line.number, format!("expected key = value, got '{}'", line.text)))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn number(line: &Line<'_>, key: &str, v: &str) -> Result<f64> {
    parse_number(v).ok_or_else(|| perr(line.number, format!("bad number for {key}: '{v}'")))
}

/// Parses the layout part of a document.
pub fn parse_layout(text: &str) -> Result<Layout> {
    let mut k0 = None;
    let mut gamma_right = 1.0;
    let mut gamma_left = 0.0;
    let mut by_phase: Vec<(usize, f64)> = Vec::new();
    let mut by_x: Vec<Position> = Vec::new();
    let mut last_line = 0;
    for line in lines(text)?.iter().filter(|l| l.section == Section::Layout) {
        last_line = line.number;
        if let Some(rest) = line.text.strip_prefix("point") {
            let mut atom = None;
            let mut phase = None;
            let mut x = None;
            for tok in rest.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| perr(line.number, format!("expected key=value in point, got '{tok}'")))?;
                match k {
                    "atom" => atom = Some(v.parse::<usize>().map_err(|_| perr(line.number, format!("bad atom index '{v}'")))?),
                    "phase" => phase = Some(number(line, k, v)?),
                    "x" => x = Some(number(line, k, v)?),
                    other => return Err(perr(line.number, format!("unknown point field '{other}'"))),
                }
            }
            let atom = atom.ok_or_else(|| perr(line.number, "point needs atom=<j>"))?;
            match (phase, x) {
                (Some(p), None) => by_phase.push((atom, p)),
                (None, Some(x)) => by_x.push(Position { atom, x }),
                _ => return Err(perr(line.number, "point needs exactly one of phase= or x=")),
            }
            if !by_phase.is_empty() && !by_x.is_empty() {
                return Err(perr(line.number, "mixed x= and phase= points"));
            }
            continue;
        }
        let (k, v) = key_value(line)?;
        match k.as_str() {
            "k0" => k0 = Some(number(line, &k, &v)?),
            "gamma_right" => gamma_right = number(line, &k, &v)?,
            "gamma_left" => gamma_left = number(line, &k, &v)?,
            other => return Err(perr(line.number, format!("unknown layout key '{other}'"))),
        }
    }
    let wrap = |e: Error| match e {
        Error::Parse { .. } => e,
        other => perr(last_line, other.to_string()),
    };
    if !by_x.is_empty() {
        let k0 = k0.ok_or_else(|| perr(last_line, "x= points need k0"))?;
        phases_from_positions(k0, &by_x, gamma_right, gamma_left).map_err(wrap)
    } else {
        if k0.is_some() {
            log::warn!("k0 is ignored for phase= points");
        }
        Layout::from_phases(&by_phase, gamma_right, gamma_left).map_err(wrap)
    }
}

/// A simulation request: the config plus an optional reference engine.
#[derive(Clone, Debug, PartialEq)]
pub struct SimRequest {
    pub config: SimConfig,
    pub reference: Option<Engine>,
}

/// Parses `[layout]` + `[simulation]`.
pub fn parse_sim_config(text: &str) -> Result<SimRequest> {
    let layout = parse_layout(text)?;
    let mut dt = None;
    let mut steps = None;
    let mut engine = Engine::Cascaded;
    let mut d_right = 2usize;
    let mut d_left = None;
    let mut initial = None;
    let mut bin_input = BinInput::Vacuum;
    let mut reference = None;
    let mut last_line = 0;
    for line in lines(text)?.iter().filter(|l| l.section == Section::Simulation) {
        last_line = line.number;
        let (k, v) = key_value(line)?;
        let int = |v: &str| v.parse::<usize>().map_err(|_| perr(line.number, format!("bad integer for {k}: '{v}'")));
        match k.as_str() {
            "dt" => dt = Some(number(line, &k, &v)?),
            "steps" => steps = Some(int(&v)?),
            "engine" => engine = v.parse().map_err(|e: Error| perr(line.number, e.to_string()))?,
            "d_right" => d_right = int(&v)?,
            "d_left" => d_left = Some(int(&v)?),
            "initial" => {
                let flags: Vec<bool> = v
                    .chars()
                    .map(|c| match c {
                        'e' => Ok(true),
                        'g' => Ok(false),
                        other => Err(perr(line.number, format!("initial state letters are e/g, got '{other}'"))),
                    })
                    .collect::<Result<_>>()?;
                initial = Some(flags);
            }
            "bin_input" => {
                bin_input = if v == "vacuum" {
                    BinInput::Vacuum
                } else {
                    let n = v
                        .strip_prefix("fock:")
                        .and_then(|n| n.parse().ok())
                        .ok_or_else(|| perr(line.number, format!("bin_input is vacuum or fock:<n>, got '{v}'")))?;
                    BinInput::Fock(n)
                }
            }
            "reference" => {
                reference = match v.as_str() {
                    "none" => None,
                    e => Some(e.parse().map_err(|e: Error| perr(line.number, e.to_string()))?),
                }
            }
            other => return Err(perr(line.number, format!("unknown simulation key '{other}'"))),
        }
    }
    let dt = dt.ok_or_else(|| perr(last_line, "simulation needs dt"))?;
    let steps = steps.ok_or_else(|| perr(last_line, "simulation needs steps"))?;
    let atoms = AtomRegister::for_layout(&layout)?;
    let flags = initial.unwrap_or_else(|| (0..layout.n_atoms()).map(|j| j == 0).collect());
    let wrap = |e: Error| perr(last_line, e.to_string());
    let initial = atoms.product_state(&flags).map_err(wrap)?;
    let d_left = d_left.unwrap_or(if layout.is_unidirectional() { 0 } else { d_right });
    let bins = BinRegister::new(d_right, d_left).map_err(wrap)?;
    let config = SimConfig { layout, dt, steps, initial, bins, engine, bin_input };
    config.validate().map_err(wrap)?;
    Ok(SimRequest { config, reference })
}

/// Canonical layout text, phases in full precision.
pub fn emit_layout(layout: &Layout) -> String {
    let mut out = format!(
        "[layout]\ngamma_right = {:.16e}\ngamma_left = {:.16e}\n",
        layout.gamma_right(),
        layout.gamma_left()
    );
    for p in layout.points() {
        let _ = writeln!(out, "point atom={} phase={:.16e}", p.atom, p.phase);
    }
    out
}

/// `t,pop_0,…,pop_{n−1},purity,ref_distance`, one row per sample.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for j in 0..traj.n_atoms() {
        let _ = write!(out, ",pop_{j}");
    }
    out.push_str(",purity,ref_distance\n");
    for i in 0..traj.len() {
        let _ = write!(out, "{:.16e}", traj.times[i]);
        for p in &traj.populations[i] {
            let _ = write!(out, ",{p:.16e}");
        }
        let _ = write!(out, ",{:.16e}", traj.purity[i]);
        match &traj.reference_distance {
            Some(d) => {
                let _ = writeln!(out, ",{:.16e}", d[i]);
            }
            None => out.push_str(",nan\n"),
        }
    }
    out
}

/// Row-major `re,im` pairs, one matrix row per line.
pub fn matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e},{:.16e}", m[(i, j)].re, m[(i, j)].im)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pi_expressions() {
        assert_eq!(parse_number("pi"), Some(PI));
        assert_eq!(parse_number("-pi/2"), Some(-PI / 2.0));
        assert_eq!(parse_number("3pi/2"), Some(3.0 * PI / 2.0));
        assert_eq!(parse_number("2*pi/3"), Some(2.0 * PI / 3.0));
        assert_eq!(parse_number("0.25"), Some(0.25));
        assert_eq!(parse_number("1e-3"), Some(1e-3));
        assert_eq!(parse_number("pi/"), None);
        assert_eq!(parse_number("x"), None);
    }

    #[test]
    fn bare_layout() {
        let l = parse_layout("gamma_right = 2\n# braided\npoint atom=0 phase=0\npoint atom=1 phase=pi/2\npoint atom=0 phase=pi\npoint atom=1 phase=3pi/2\n").unwrap();
        assert_eq!(l.pattern(), vec![0, 1, 0, 1]);
        assert_eq!(l.gamma_right(), 2.0);
        assert_eq!(l.gamma_left(), 0.0);
    }

    #[test]
    fn position_layout() {
        let l = parse_layout("[layout]\nk0=2\npoint atom=1 x=pi/8\npoint atom=0 x=0\n").unwrap();
        assert_eq!(l.pattern(), vec![0, 1]);
        assert!((l.points()[1].phase - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn layout_errors_have_lines() {
        let cases = [
            ("point atom=0 phase=0\npoint atom=0 x=1\n", 2),
            ("point atom=0\n", 1),
            ("gamma_right 1\n", 1),
            ("point atom=0 phase=zero\n", 1),
            ("bogus = 1\n", 1),
            ("point atom=0 x=1\n", 1),
            ("[weird]\n", 1),
        ];
        for (text, line) in cases {
            match parse_layout(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn layout_round_trip() {
        let l = Layout::from_phases(&[(0, 0.1), (1, 2.0), (0, 0.1 + PI)], 1.5, 0.25).unwrap();
        assert_eq!(parse_layout(&emit_layout(&l)).unwrap(), l);
    }

    #[test]
    fn simulation_config() {
        let text = "[layout]\npoint atom=0 phase=0\npoint atom=1 phase=pi/2\npoint atom=0 phase=pi\npoint atom=1 phase=3pi/2\n\
                    [simulation]\ndt=0.01\nsteps=10\nengine=effective\ninitial=ge\nreference=cascaded\n";
        let r = parse_sim_config(text).unwrap();
        assert_eq!(r.config.engine, Engine::Effective);
        assert_eq!(r.reference, Some(Engine::Cascaded));
        assert_eq!(r.config.steps, 10);
        assert!(!r.config.bins.is_bidirectional());
        assert!((r.config.initial.operator()[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!(parse_sim_config("point atom=0 phase=0\n[simulation]\nsteps=3\n").is_err());
        assert!(matches!(
            parse_sim_config("point atom=0 phase=0\n[simulation]\ndt=0.1\nsteps=3\ninitial=x\n"),
            Err(Error::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn csv_shapes() {
        let m = Matrix::from_fn(2, 2, |i, j| num_complex::Complex64::new(i as f64, j as f64));
        let csv = matrix_csv(&m);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 4);
    }
}
