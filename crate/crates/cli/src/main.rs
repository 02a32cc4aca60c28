//! memsyn: run memristor synapse experiments, emit CSV trajectories,
//! analyze per-pulse update regimes, and check runs against closed forms.
//!
//! Exit codes: 0 success, 1 unreadable or invalid input, 2 simulation
//! failure, 3 verification over tolerance.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use memsyn::analysis::{
    alpha, classify_regime, first_saturated_index, linearity_r2, oracle_series_const_v,
    oracle_single_const_v, oracle_validity_end, per_pulse_deltas, pre_saturation_window,
    DEFAULT_TOL_REL,
};
use memsyn::expfile::PRESET_NAMES;
use memsyn::{
    parse_experiment, preset, serialize_experiment, simulate, DriftModel, Experiment, PulseTrain,
    SolverConfig, StepMethod, Topology,
};
use memsyn_cli::csvio;

#[derive(Parser)]
#[command(
    name = "memsyn",
    version,
    about = "Memristor synapse transient simulator"
)]
struct Cli {
    /// Override the solver time step in seconds
    #[arg(long, global = true, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Override the stimulus pulse count
    #[arg(long, global = true, value_name = "N")]
    pulses: Option<u32>,
    /// Override the stimulus pulse amplitude in volts
    #[arg(long, global = true, value_name = "VOLTS")]
    amplitude: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an experiment file ("-" for stdin) and write the CSV trajectory
    Run {
        experiment: String,
        /// Output path, "-" for stdout
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Summarize a trajectory CSV: swing ratio, per-pulse deltas, regime, linearity
    Analyze { csv: String },
    /// Compare a preset, forced to linear drift under constant drive, with its closed form
    Verify { preset: String },
    /// Print a preset as an experiment file, or list the preset names
    Preset { name: Option<String> },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let overrides = Overrides {
        dt: cli.dt,
        pulses: cli.pulses,
        amplitude: cli.amplitude,
    };
    match cli.command {
        Command::Run { experiment, output } => cmd_run(&experiment, &output, &overrides),
        Command::Analyze { csv } => cmd_analyze(&csv),
        Command::Verify { preset } => cmd_verify(&preset),
        Command::Preset { name } => cmd_preset(name.as_deref()),
    }
}

struct Overrides {
    dt: Option<f64>,
    pulses: Option<u32>,
    amplitude: Option<f64>,
}

impl Overrides {
    /// Rebuilds the experiment with any overridden stimulus or solver
    /// values, revalidating the combination.
    fn apply(&self, exp: Experiment) -> Result<Experiment, memsyn::InvalidParam> {
        if self.dt.is_none() && self.pulses.is_none() && self.amplitude.is_none() {
            return Ok(exp);
        }
        let stim = PulseTrain::new(
            self.amplitude.unwrap_or_else(|| exp.stimulus().amplitude()),
            exp.stimulus().width(),
            exp.stimulus().period(),
            self.pulses.unwrap_or_else(|| exp.stimulus().count()),
            exp.stimulus().baseline(),
        )?;
        let solver = SolverConfig::new(
            self.dt.unwrap_or_else(|| exp.solver().dt()),
            exp.solver().method(),
            exp.solver().record_stride(),
        )?;
        Experiment::new(exp.topology().clone(), stim, solver, exp.label())
    }
}

fn read_source(path: &str) -> io::Result<String> {
    let mut text = String::new();
    if path == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        File::open(path)?.read_to_string(&mut text)?;
    }
    Ok(text)
}

fn cmd_run(experiment: &str, output: &str, overrides: &Overrides) -> ExitCode {
    let text = match read_source(experiment) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {experiment}: {e}");
            return ExitCode::from(1);
        }
    };
    let exp = match parse_experiment(&text).and_then(|e| overrides.apply(e).map_err(Into::into)) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {experiment}: {e}");
            return ExitCode::from(1);
        }
    };
    let traj = match exp.run() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: simulation failed: {e}");
            return ExitCode::from(2);
        }
    };
    let written = if output == "-" {
        csvio::write_trajectory(&mut BufWriter::new(io::stdout().lock()), &exp, &traj)
    } else {
        File::create(output)
            .and_then(|f| csvio::write_trajectory(&mut BufWriter::new(f), &exp, &traj))
    };
    if let Err(e) = written {
        eprintln!("error: {output}: {e}");
        return ExitCode::from(2);
    }
    let last = traj
        .samples
        .last()
        .expect("simulation records at least t = 0");
    eprintln!(
        "final m1 = {:.6e} ohm, total q = {:.6e} C, {} samples",
        last.m1,
        last.q,
        traj.samples.len()
    );
    ExitCode::SUCCESS
}

fn cmd_analyze(csv: &str) -> ExitCode {
    let opened: Box<dyn io::BufRead> = if csv == "-" {
        Box::new(BufReader::new(io::stdin()))
    } else {
        match File::open(csv) {
            Ok(f) => Box::new(BufReader::new(f)),
            Err(e) => {
                eprintln!("error: {csv}: {e}");
                return ExitCode::from(1);
            }
        }
    };
    let (exp, traj) = match csvio::read_trajectory(opened) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {csv}: {e}");
            return ExitCode::from(1);
        }
    };
    let series = match per_pulse_deltas(&traj, exp.stimulus()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {csv}: {e}");
            return ExitCode::from(1);
        }
    };

    if !exp.label().is_empty() {
        println!("label: {}", exp.label());
    }
    match exp.topology() {
        Topology::Single(_) => println!("topology: single"),
        Topology::SeriesPair { m1, m2 } => {
            println!("topology: series");
            println!("alpha: {:.6}", alpha(m1, m2));
        }
    }
    println!("pulse,delta_m1");
    for d in &series.deltas {
        println!("{},{:.6e}", d.pulse_index, d.delta_m1);
    }
    match classify_regime(&series, DEFAULT_TOL_REL) {
        Ok(regime) => println!("regime: {regime}"),
        Err(e) => println!("regime: unclassifiable ({e})"),
    }
    if let Some(k) = first_saturated_index(&series) {
        println!("saturated from pulse: {k}");
    }
    match linearity_r2(&traj, pre_saturation_window(&series, exp.stimulus())) {
        Ok(r2) => println!("r2 (pre-saturation): {r2:.6}"),
        Err(e) => println!("r2 (pre-saturation): unavailable ({e})"),
    }
    ExitCode::SUCCESS
}

/// Constant drive low enough to keep every preset inside the closed
/// forms' validity for a good part of the run.
const VERIFY_VOLTS: f64 = 0.1;
const VERIFY_SPAN: f64 = 0.5;
const VERIFY_TOL: f64 = 1e-4;

fn cmd_verify(name: &str) -> ExitCode {
    let exp = match preset(name) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let topo = match exp.topology() {
        Topology::Single(p) => Topology::Single(p.with_model(DriftModel::LinearDrift)),
        Topology::SeriesPair { m1, m2 } => Topology::series(
            m1.with_model(DriftModel::LinearDrift),
            m2.with_model(DriftModel::LinearDrift),
        )
        .expect("preset pair stays valid under a model change"),
    };
    let stim = PulseTrain::constant(VERIFY_VOLTS, VERIFY_SPAN).expect("constant drive is valid");
    let solver = SolverConfig::new(1e-6, StepMethod::Euler, 10).expect("fixed solver is valid");
    let traj = match simulate(&topo, &stim, &solver) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: simulation failed: {e}");
            return ExitCode::from(2);
        }
    };
    // stay clear of the rail, where the clamped run leaves the closed form
    let cutoff = 0.95 * oracle_validity_end(&topo, VERIFY_VOLTS);
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    for s in &traj.samples {
        if s.t > cutoff {
            break;
        }
        match &topo {
            Topology::Single(p) => {
                let m = oracle_single_const_v(p, VERIFY_VOLTS, s.t)
                    .expect("inside the validity window");
                worst = worst.max((s.m1 - m).abs() / m);
            }
            Topology::SeriesPair { m1, m2 } => {
                let (mt, m1_exact) = oracle_series_const_v(m1, m2, VERIFY_VOLTS, s.t)
                    .expect("inside the validity window");
                worst = worst.max((s.m_total - mt).abs() / mt);
                worst = worst.max((s.m1 - m1_exact).abs() / m1_exact);
            }
        }
        compared += 1;
    }
    println!(
        "{name}: max relative deviation {worst:.3e} over {compared} samples (tolerance {VERIFY_TOL:.0e})"
    );
    if worst < VERIFY_TOL {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn cmd_preset(name: Option<&str>) -> ExitCode {
    match name {
        None => {
            for n in PRESET_NAMES {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Some(n) => match preset(n) {
            Ok(exp) => {
                print!("{}", serialize_experiment(&exp));
                io::stdout().flush().ok();
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
