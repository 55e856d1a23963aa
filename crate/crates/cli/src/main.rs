// Copyright 2026 The giantdf Authors
// SPDX-License-Identifier: Apache-2.0

//! `giantdf` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use giantdf_core::circuit::{
    cascaded_in_circuit_frame, circuit_unitary, compile_braided_with, compile_general, emit_text, iswap_iterations,
    mediator_flip_amplitude, CompileOptions, Gate,
};
use giantdf_core::collision::{run_stream, run_sweep, Engine, SimConfig};
use giantdf_core::dispersive::{exact_vs_effective, two_atom_exchange, ModeSet};
use giantdf_core::effective::{coupling_matrix, effective_hamiltonian, lamb_shift_check, AtomRegister};
use giantdf_core::format::{matrix_csv, parse_layout, parse_sim_config, trajectory_csv, SimRequest};
use giantdf_core::tensor::{hermitian_eigenvalues, max_diff_up_to_phase, DensityMatrix};
use giantdf_core::topology::{classify_two_atom, df_residual, Layout};
use giantdf_core::{tolerance, verify, Error};

#[derive(Parser)]
#[command(name = "giantdf", version, about = "Decoherence-free giant atoms in a waveguide: collision models and effective Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the per-atom DF residuals and the two-atom class.
    CheckDf {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long, default_value_t = tolerance::DF_DEFAULT)]
        tol: f64,
    },
    /// Write J.csv and Heff.csv and print the H_eff spectrum.
    Heff {
        #[arg(long)]
        layout: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run the collision stream and write trajectory.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the engine given in the config.
        #[arg(long)]
        engine: Option<Engine>,
        /// `none` or an engine name; overrides the config.
        #[arg(long)]
        reference: Option<String>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Compile one braided collision step to a gate list.
    CompileCircuit {
        #[arg(long)]
        gamma_dt: f64,
        #[arg(long)]
        allow_out_of_range: bool,
        /// Gate-list file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
        #[arg(long, default_value_t = tolerance::STRUCTURAL)]
        tol: f64,
    },
    /// Compile one collision step of a unidirectional layout to u4 slot gates.
    CompileGeneral {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Exact atom-mode dynamics against the dispersive H_eff.
    DispersiveDemo {
        #[arg(long, default_value_t = 0.01)]
        g: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 5)]
        fock_dim: usize,
        #[arg(long, default_value_t = 1e4)]
        t_end: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run one config at several dt values; writes run_NNN.csv per entry.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated dt values; steps are rescaled to keep the end time.
        #[arg(long, value_delimiter = ',', required = true)]
        dt: Vec<f64>,
        #[command(flatten)]
        out: OutDir,
    },
}

#[derive(Args)]
struct OutDir {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

enum Failure {
    Input(String),
    Negative(String),
    Tolerance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_layout(path: &Path) -> Result<Layout, Failure> {
    parse_layout(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str, force: bool) -> Outcome {
    if path.exists() && !force {
        return Err(Failure::Input(format!("{} exists; pass --force to overwrite", path.display())));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::Input(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

impl OutDir {
    fn write(&self, name: &str, contents: &str) -> Outcome {
        write_file(&self.out.join(name), contents, self.force)
    }
}

fn check_df(layout: &Path, tol: f64) -> Outcome {
    let layout = load_layout(layout)?;
    let report = df_residual(&layout, tol);
    for (j, r) in report.per_atom_residual.iter().enumerate() {
        println!("atom {j}: residual={r:.3e}");
    }
    let mut line = format!("DF: {}", if report.is_df { "yes" } else { "no" });
    if layout.n_atoms() == 2 {
        line.push_str(&format!(", class: {}", classify_two_atom(&layout)?));
    }
    println!("{line}");
    if report.is_df {
        Ok(())
    } else {
        Err(Failure::Negative("layout is not decoherence-free".into()))
    }
}

fn heff(layout: &Path, out: &OutDir) -> Outcome {
    let layout = load_layout(layout)?;
    let atoms = AtomRegister::for_layout(&layout)?;
    let j = coupling_matrix(&layout);
    let h = effective_hamiltonian(&layout, &atoms)?;
    out.write("J.csv", &matrix_csv(&j.j))?;
    out.write("Heff.csv", &matrix_csv(h.matrix()))?;
    let spectrum = hermitian_eigenvalues(&h)?;
    println!("H_eff spectrum: {}", fmt_list(&spectrum));
    if atoms.n_atoms() > 1 {
        let idx = atoms.single_excitation_indices();
        let block = giantdf_core::tensor::OperatorMatrix::new(h.restrict(&idx, &idx))?;
        println!("single-excitation spectrum: {}", fmt_list(&hermitian_eigenvalues(&block)?));
    }
    if let Ok(shift) = lamb_shift_check(&layout) {
        println!("sigma_z coefficient: {:.12e}", shift.sigma_z_coefficient);
        println!("sine sum: {:.12}", shift.sine_sum);
    }
    if df_residual(&layout, tolerance::DF_DEFAULT).is_df {
        Ok(())
    } else {
        Err(Failure::Negative("layout is not decoherence-free; H_eff describes only the unitary part".into()))
    }
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(" ")
}

fn apply_overrides(req: &mut SimRequest, engine: Option<Engine>, reference: Option<&str>) -> Outcome {
    if let Some(e) = engine {
        req.config.engine = e;
    }
    match reference {
        None => {}
        Some("none") => req.reference = None,
        Some(r) => req.reference = Some(r.parse()?),
    }
    Ok(())
}

fn simulate_one(cfg: &SimConfig, reference: Option<Engine>) -> Result<giantdf_core::collision::Trajectory, Error> {
    let mut traj = run_stream(cfg)?;
    if let Some(engine) = reference {
        let reference = run_stream(&cfg.clone().with_engine(engine))?;
        traj.attach_reference(&reference)?;
    }
    Ok(traj)
}

fn simulate(config: &Path, engine: Option<Engine>, reference: Option<&str>, out: &OutDir) -> Outcome {
    let mut req = parse_sim_config(&read(config)?)?;
    apply_overrides(&mut req, engine, reference)?;
    let traj = simulate_one(&req.config, req.reference)?;
    out.write("trajectory.csv", &trajectory_csv(&traj))?;
    println!("engine: {}, steps: {}, dt: {}", req.config.engine, req.config.steps, req.config.dt);
    println!("min purity: {:.12}", traj.min_purity());
    if let Some(d) = traj.max_reference_distance() {
        println!("max reference distance: {d:.6e}");
    }
    Ok(())
}

fn compile_circuit(gamma_dt: f64, allow: bool, out: &Path, force: bool, tol: f64) -> Outcome {
    let opts = CompileOptions { allow_out_of_range: allow, ..CompileOptions::default() };
    let circuit = compile_braided_with(1.0, gamma_dt, &opts)?;
    let layout = Layout::equally_spaced(&[0, 1, 0, 1], std::f64::consts::FRAC_PI_2, 1.0, 0.0)?;
    let u = circuit_unitary(&circuit)?;
    let residual = max_diff_up_to_phase(&u, &cascaded_in_circuit_frame(&layout, gamma_dt)?);
    write_file(out, &emit_text(&circuit), force)?;
    let delta = circuit.gates().iter().find_map(|g| match g {
        Gate::Xy { delta, .. } => Some(*delta),
        _ => None,
    });
    println!("gates: {}", circuit.len());
    if let Some(d) = delta {
        println!("delta: {d:.12}");
    }
    println!("iswap iterations N: {}", iswap_iterations(1.0, gamma_dt)?);
    println!("identity residual: {residual:.3e}");
    println!("mediator flip amplitude: {:.3e}", mediator_flip_amplitude(&u));
    if residual <= tol {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!("identity residual {residual:.3e} above {tol:e}")))
    }
}

fn compile_general_cmd(layout: &Path, dt: f64, out: &Path, force: bool) -> Outcome {
    let layout = load_layout(layout)?;
    let circuit = compile_general(&layout, dt)?;
    write_file(out, &emit_text(&circuit), force)?;
    println!("gates: {}, qubits: {}", circuit.len(), circuit.n_qubits());
    Ok(())
}

fn dispersive_demo(g: f64, delta: f64, fock_dim: usize, t_end: f64, samples: usize, out: &OutDir) -> Outcome {
    let modes = ModeSet::single(g, delta, fock_dim)?;
    let initial = DensityMatrix::basis(2, 1)?;
    let cmp = exact_vs_effective(&modes, &initial, t_end, samples)?;
    out.write("exact.csv", &trajectory_csv(&cmp.exact))?;
    out.write("effective.csv", &trajectory_csv(&cmp.effective))?;
    let ratio = g / delta;
    let bound = 5.0 * ratio * ratio;
    println!("max population deviation: {:.6e} (bound 5(g/Delta)^2 = {bound:.6e})", cmp.max_population_deviation);
    let ex = two_atom_exchange(g, delta, fock_dim)?;
    let rel = (ex.exact_half_splitting - ex.analytic).abs() / ex.analytic;
    println!(
        "two-atom exchange: exact half-splitting {:.6e}, H_eff coupling {:.6e}, g^2/Delta {:.6e}, rel. diff {rel:.3e}",
        ex.exact_half_splitting, ex.effective_coupling, ex.analytic
    );
    if cmp.max_population_deviation <= bound && rel <= 0.01 {
        Ok(())
    } else {
        Err(Failure::Tolerance("dispersive comparison outside its bound".into()))
    }
}

fn verify_cmd(seed: u64, tol: Option<f64>) -> Outcome {
    let report = verify::run_suite(seed, tol)?;
    print!("{report}");
    if report.all_passed() {
        println!("verify: PASS");
        Ok(())
    } else {
        Err(Failure::Tolerance("verify: FAIL".into()))
    }
}

fn sweep(config: &Path, dts: &[f64], out: &OutDir) -> Outcome {
    let req = parse_sim_config(&read(config)?)?;
    let t_end = req.config.dt * req.config.steps as f64;
    let mut configs = Vec::with_capacity(dts.len());
    for &dt in dts {
        let mut cfg = req.config.clone();
        cfg.dt = dt;
        cfg.steps = ((t_end / dt).round() as usize).max(1);
        cfg.validate()?;
        configs.push(cfg);
    }
    let trajs = run_sweep(&configs);
    let mut index = String::from("run,dt,steps,min_purity\n");
    for (i, (cfg, traj)) in configs.iter().zip(trajs).enumerate() {
        let mut traj = traj?;
        if let Some(engine) = req.reference {
            traj.attach_reference(&run_stream(&cfg.clone().with_engine(engine))?)?;
        }
        out.write(&format!("run_{i:03}.csv"), &trajectory_csv(&traj))?;
        index.push_str(&format!("{i},{:.16e},{},{:.16e}\n", cfg.dt, cfg.steps, traj.min_purity()));
    }
    out.write("index.csv", &index)?;
    println!("runs: {}", configs.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::CheckDf { layout, tol } => check_df(layout, *tol),
        Command::Heff { layout, out } => heff(layout, out),
        Command::Simulate { config, engine, reference, out } => simulate(config, *engine, reference.as_deref(), out),
        Command::CompileCircuit { gamma_dt, allow_out_of_range, out, force, tol } => {
            compile_circuit(*gamma_dt, *allow_out_of_range, out, *force, *tol)
        }
        Command::CompileGeneral { layout, dt, out, force } => compile_general_cmd(layout, *dt, out, *force),
        Command::DispersiveDemo { g, delta, fock_dim, t_end, samples, out } => {
            dispersive_demo(*g, *delta, *fock_dim, *t_end, *samples, out)
        }
        Command::Verify { seed, tol } => verify_cmd(*seed, *tol),
        Command::Sweep { config, dt, out } => sweep(config, dt, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Negative(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
        Err(Failure::Tolerance(m)) => {
            eprintln!("{m}");
            ExitCode::from(3)
        }
    }
}
