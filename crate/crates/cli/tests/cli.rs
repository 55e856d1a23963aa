// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BRAIDED: &str = "\
gamma_right = 1.0
point atom=0 phase=0
point atom=1 phase=pi/2
point atom=0 phase=pi
point atom=1 phase=3pi/2
";

const SERIAL: &str = "\
point atom=0 phase=0
point atom=0 phase=pi
point atom=1 phase=2pi
point atom=1 phase=3pi
";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_giantdf")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn numbers(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    text.split([',', '\n']).filter(|x| !x.is_empty()).map(|x| x.parse().unwrap()).collect()
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let col = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn check_df_exit_codes() {
    let dir = TempDir::new().unwrap();
    let o = run(&["check-df", "--layout", s(&write(&dir, "b.txt", BRAIDED))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("DF: yes, class: braided"));

    let o = run(&["check-df", "--layout", s(&write(&dir, "one.txt", "point atom=0 phase=0\n"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("DF: no"));

    let o = run(&["check-df", "--layout", s(&write(&dir, "bad.txt", "point atom=0 phase=0\npoint atom=0\n"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = run(&["check-df", "--layout", s(&dir.path().join("missing.txt"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn heff_reports() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("serial");
    let o = run(&["heff", "--layout", s(&write(&dir, "s.txt", SERIAL)), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let h = numbers(&out.join("Heff.csv"));
    assert!(h.iter().all(|x| x.abs() < 1e-13));
    // J is zero apart from the anti-Hermitian diagonal −i(γ−γ′)/2
    let j = numbers(&out.join("J.csv"));
    assert_eq!(j.len(), 8);
    for (k, x) in j.iter().enumerate() {
        let diagonal_im = k == 1 || k == 7;
        assert!(diagonal_im || x.abs() < 1e-13, "entry {k} = {x}");
    }
    assert!((j[1] + 0.5).abs() < 1e-15 && (j[7] + 0.5).abs() < 1e-15);

    let out = dir.path().join("braided");
    let o = run(&["heff", "--layout", s(&write(&dir, "b.txt", BRAIDED)), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("single-excitation spectrum: -1.000000000000 1.000000000000"));
    assert_eq!(fs::read_to_string(out.join("Heff.csv")).unwrap().lines().count(), 4);

    let three = "point atom=0 phase=0\npoint atom=0 phase=2pi/3\npoint atom=0 phase=4pi/3\n";
    let o = run(&["heff", "--layout", s(&write(&dir, "t.txt", three)), "--out", s(&dir.path().join("t"))]);
    assert!(stdout(&o).contains("sine sum: 0.866025403784"));
}

#[test]
fn simulate_against_effective_reference() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{BRAIDED}[simulation]\ndt = 0.01\nsteps = 157\ninitial = eg\n");
    let cfg = write(&dir, "c.txt", &cfg);
    let out = dir.path().join("run");
    let o = run(&["simulate", "--config", s(&cfg), "--reference", "effective", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let d = csv_column(&out.join("trajectory.csv"), "ref_distance");
    assert_eq!(d.len(), 158);
    assert!(d.iter().all(|x| *x <= 0.02));

    // same inputs, byte-identical output
    let again = dir.path().join("again");
    run(&["simulate", "--config", s(&cfg), "--reference", "effective", "--out", s(&again)]);
    assert_eq!(fs::read(out.join("trajectory.csv")).unwrap(), fs::read(again.join("trajectory.csv")).unwrap());

    // no reference → nan column
    let plain = dir.path().join("plain");
    run(&["simulate", "--config", s(&cfg), "--engine", "simultaneous", "--out", s(&plain)]);
    assert!(csv_column(&plain.join("trajectory.csv"), "ref_distance").iter().all(|x| x.is_nan()));
}

#[test]
fn serial_populations_are_frozen() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.txt", &format!("{SERIAL}[simulation]\ndt = 0.01\nsteps = 100\ninitial = eg\n"));
    let out = dir.path().join("o");
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(0));
    let p0 = csv_column(&out.join("trajectory.csv"), "pop_0");
    assert!(p0.iter().all(|p| (p - 1.0).abs() < 1e-12));
}

#[test]
fn bidirectional_chiral_braided() {
    let dir = TempDir::new().unwrap();
    // γ′ = γ/2 with (γ + γ′)dt = 0.01, the coarse graining of the one-way run
    let layout = BRAIDED.replace("gamma_right = 1.0", "gamma_right = 0.6666666666666666\ngamma_left = 0.3333333333333333");
    let o = run(&["heff", "--layout", s(&write(&dir, "l.txt", &layout)), "--out", s(&dir.path().join("h"))]);
    assert_eq!(o.status.code(), Some(0));
    let j = numbers(&dir.path().join("h/J.csv"));
    // row 0: re J00, im J00, re J01, im J01
    assert!((j[2].hypot(j[3]) - 0.5).abs() < 1e-13);
    assert!((j[1] + 1.0 / 6.0).abs() < 1e-13, "chiral diagonal −i(γ−γ′)/2");

    let cfg = write(&dir, "c.txt", &format!("{layout}[simulation]\ndt = 0.01\nsteps = 314\nreference = effective\n"));
    let out = dir.path().join("o");
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(0));
    assert!(csv_column(&out.join("trajectory.csv"), "ref_distance").iter().all(|x| *x <= 0.02));
}

#[test]
fn outputs_need_force_to_overwrite() {
    let dir = TempDir::new().unwrap();
    let layout = write(&dir, "b.txt", BRAIDED);
    let out = dir.path().join("nested/dir");
    assert_eq!(run(&["heff", "--layout", s(&layout), "--out", s(&out)]).status.code(), Some(0));
    assert_eq!(run(&["heff", "--layout", s(&layout), "--out", s(&out)]).status.code(), Some(1));
    assert_eq!(run(&["heff", "--layout", s(&layout), "--out", s(&out), "--force"]).status.code(), Some(0));
}

#[test]
fn compile_circuit_report() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("c.txt");
    let o = run(&["compile-circuit", "--gamma-dt", "0.01", "--out", s(&file)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("gates: 6"));
    assert!(text.contains("delta: 0.031830988618"));
    assert!(text.contains("iswap iterations N: 100"));
    let residual: f64 = text.lines().find_map(|l| l.strip_prefix("identity residual: ")).unwrap().parse().unwrap();
    assert!(residual <= 1e-12);
    let gates = fs::read_to_string(&file).unwrap();
    assert!(gates.starts_with("qubits 3\n# q[0]=M q[1]=A0 q[2]=A1\n"));
    assert_eq!(gates.lines().filter(|l| l.starts_with("xy")).count(), 4);

    let far = dir.path().join("far.txt");
    assert_eq!(run(&["compile-circuit", "--gamma-dt", "0.3", "--out", s(&far)]).status.code(), Some(1));
    assert!(!far.exists());
    let o = run(&["compile-circuit", "--gamma-dt", "0.3", "--allow-out-of-range", "--out", s(&far)]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn compile_general_writes_slot_gates() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "l.txt", "point atom=0 phase=0.2\npoint atom=1 phase=1\npoint atom=0 phase=0.2+pi\n");
    let file = dir.path().join("g.txt");
    let o = run(&["compile-general", "--layout", s(&l), "--dt", "0.02", "--out", s(&file)]);
    assert_eq!(o.status.code(), Some(1), "0.2+pi is not a number expression");
    let l = write(&dir, "l.txt", "point atom=0 phase=0\npoint atom=1 phase=1\npoint atom=0 phase=pi\n");
    let o = run(&["compile-general", "--layout", s(&l), "--dt", "0.02", "--out", s(&file)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&file).unwrap().lines().filter(|l| l.starts_with("u4")).count(), 3);
}

#[test]
fn dispersive_demo_runs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("d");
    let o = run(&["dispersive-demo", "--t-end", "2000", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("exact.csv").exists() && out.join("effective.csv").exists());
    assert!(stdout(&o).contains("two-atom exchange"));
    let o = run(&["dispersive-demo", "--delta", "0", "--out", s(&dir.path().join("z"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
}

#[test]
fn verify_suite() {
    let o = run(&["verify", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("verify: PASS\n"));
    assert_eq!(stdout(&o), stdout(&run(&["verify", "--seed", "5"])));
    assert_eq!(run(&["verify", "--tol", "0"]).status.code(), Some(3));
}

#[test]
fn sweep_names_runs_by_index() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.txt", &format!("{BRAIDED}[simulation]\ndt = 0.02\nsteps = 10\n"));
    let out = dir.path().join("sw");
    let o = run(&["sweep", "--config", s(&cfg), "--dt", "0.02,0.01,0.005", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    for i in 0..3 {
        assert!(out.join(format!("run_{i:03}.csv")).exists());
    }
    let index = fs::read_to_string(out.join("index.csv")).unwrap();
    assert_eq!(index.lines().count(), 4);
    assert!(index.lines().nth(3).unwrap().starts_with("2,5.0000000000000001e-3,40,"));
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(run(&["simulate"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
