//! The `qholo` command line.
//!
//! ```text
//! qholo <evolve|constraint|sweep> --config <path> [--output <path>] [--threads N]
//! ```
//!
//! Exit codes: 0 on success, 2 when the configuration is rejected, 3 when a
//! numerical routine fails. Output is written once, after everything has
//! been computed, to `--output`, the config's `output` field, or stdout.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::dynamics::Simulation;
use crate::echo::{self, format_float};
use crate::error::Error;
use crate::geometry::constraint_gradient;

use config::{ConstraintConfig, EvolveConfig, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const SCHEMA_NOTE: &str = "Configuration files are JSON. Their schema ships with the qholo \
sources at crates/core/schema/config.schema.json; example configs live next to it.";

#[derive(Debug, Parser)]
#[command(name = "qholo", version, about = "State-dependent interactions, entanglement and multipole echoes", after_help = SCHEMA_NOTE)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a two-body state along a trajectory; writes `t,phi,concurrence` CSV.
    Evolve(CommonArgs),
    /// Evaluate the no-entanglement constraint at one configuration; writes a JSON report.
    Constraint(CommonArgs),
    /// Sweep the echo protocol over speeds and angular velocities; writes CSV.
    Sweep(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; overrides the config's `output` field.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, env = "QHOLO_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(Error),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "configuration error: {msg}"),
            Self::Numerical(e) => write!(f, "numerical error: {e}"),
        }
    }
}

fn config_err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let args = match &cli.command {
        Command::Evolve(a) | Command::Constraint(a) | Command::Sweep(a) => a,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("qholo: configuration error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("qholo: cannot start worker pool: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let outcome = pool.install(|| match &cli.command {
        Command::Evolve(a) => cmd_evolve(a),
        Command::Constraint(a) => cmd_constraint(a),
        Command::Sweep(a) => cmd_sweep(a),
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("qholo: {failure}");
            failure.exit_code()
        }
    }
}

fn emit(args: &CommonArgs, from_config: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    let target = args
        .output
        .clone()
        .or_else(|| from_config.as_ref().map(|p| base_dir(&args.config).join(p)));
    match target {
        Some(path) => fs::write(&path, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_evolve(args: &CommonArgs) -> Result<(), Failure> {
    let cfg: EvolveConfig = load(&args.config)?;
    let potential = cfg.potential.build().map_err(config_err)?;
    let trajectory = cfg
        .trajectory
        .build(&base_dir(&args.config))
        .map_err(Failure::Config)?;
    let times = cfg.times.values().map_err(Failure::Config)?;
    let quadrature = cfg.quadrature.build().map_err(config_err)?;
    let initial = cfg.initial_state().map_err(config_err)?;
    for &t in &times {
        trajectory.check_time(t).map_err(config_err)?;
    }

    let sim = Simulation::new(trajectory, potential).with_quadrature(quadrature);
    let mut out = String::from("t,phi,concurrence\n");
    for &t in &times {
        let phi = sim.entangling_phase(t).map_err(Failure::Numerical)?;
        let state = sim.evolve(t, &initial).map_err(Failure::Numerical)?;
        let c = state.concurrence().map_err(Failure::Numerical)?;
        writeln!(
            out,
            "{},{},{}",
            format_float(t),
            format_float(phi),
            format_float(c)
        )
        .expect("writing to a String");
    }
    emit(args, &cfg.output, &out)
}

fn json_number(x: f64) -> String {
    if x.is_finite() {
        format_float(x)
    } else {
        "null".into()
    }
}

fn cmd_constraint(args: &CommonArgs) -> Result<(), Failure> {
    let cfg: ConstraintConfig = load(&args.config)?;
    let potential = cfg.potential.build().map_err(config_err)?;
    let configuration = cfg.configuration.build().map_err(config_err)?;
    if !(cfg.tolerance >= 0.0 && cfg.tolerance.is_finite()) {
        return Err(Failure::Config(format!(
            "tolerance must be non-negative, got {}",
            cfg.tolerance
        )));
    }

    let h = configuration
        .constraint_residual(&potential)
        .map_err(Failure::Numerical)?;
    let gradient =
        constraint_gradient(&configuration, &potential, cfg.step).map_err(Failure::Numerical)?;
    let gradient_norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    let report = format!(
        "{{\n  \"h\": {},\n  \"gradient_norm\": {},\n  \"in_constraint_set\": {}\n}}\n",
        json_number(h),
        json_number(gradient_norm),
        h.abs() <= cfg.tolerance
    );
    emit(args, &cfg.output, &report)
}

fn cmd_sweep(args: &CommonArgs) -> Result<(), Failure> {
    let cfg: SweepConfig = load(&args.config)?;
    let template = cfg.echo.template();
    let v_grid = cfg.v_grid.values().map_err(Failure::Config)?;
    let omega_grid = cfg.omega_grid.values().map_err(Failure::Config)?;
    let quadrature = cfg.quadrature.build().map_err(config_err)?;

    let records =
        echo::sweep(&template, &quadrature, &v_grid, &omega_grid).map_err(|e| match e {
            Error::InvalidEchoParams(_) | Error::InvalidQuadrature(_) => config_err(e),
            other => Failure::Numerical(other),
        })?;
    let mut buf = Vec::new();
    echo::write_sweep_csv(&records, &mut buf, true).expect("writing to a Vec");
    let text = String::from_utf8(buf).expect("CSV output is ASCII");
    emit(args, &cfg.output, &text)
}
