//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure (with
//! partial outputs written), 3 validation failure.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{validate, ValidationReport};
use crate::diagnostics::{run_diagnostics, DiagnosticsReport, DiagnosticsSettings};
use crate::integrators::{integrate, NumericalFailure};
use config::{build_instance, build_state, load_config, RunConfig, VALIDATION_TOL};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_OVERRIDE_VAR: &str = "FLUIDALG_SEED_OVERRIDE";

/// Tolerance applied to the Jacobiator for instances built from a Lie algebra.
pub const LIE_JACOBI_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("validation failure: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fluidalg", version, about = "Simulate and check finite-dimensional 3D fluid algebras")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the Euler flow and write trace.csv, state.csv and summary.json
    Simulate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Output directory (overrides output_dir from the config)
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
        /// Override a config value by dotted path, e.g. integrator.dt=1e-3
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the identity suite and write diagnostics.json
    Diagnose {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
    },
    /// List the built-in instances and their parameters
    Instances,
}

/// Parses `args` (including the program name) and runs the command,
/// reading the seed override from the environment.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let seed_override = std::env::var(SEED_OVERRIDE_VAR).ok();
    run_with(args, seed_override.as_deref())
}

pub fn run_with<I, T>(args: I, seed_override: Option<&str>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match args.command {
        Command::Simulate { config, output, set } => cmd_simulate(&config, output.as_deref(), &set, seed_override),
        Command::Diagnose { config, output } => cmd_diagnose(&config, output.as_deref(), seed_override),
        Command::Instances => {
            print!("{}", instances_text());
            Ok(())
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fluidalg: {e}");
            e.exit_code()
        }
    }
}

pub fn instances_text() -> String {
    [
        "rigid-body  {\"moments\": [I1, I2, I3]}   principal moments, all > 0 (default [1, 2, 3])",
        "so3         {}                            so(3) with identity pairing and metric",
        "torus       {\"cutoff\": K}                 Fourier truncation on the flat 3-torus, |k|∞ <= K (default 1, dimension cap 512)",
        "random      {\"seed\": u64, \"n\": dim}       seeded random algebra",
        "custom      {\"path\": file}               algebra read from a JSON file (dim, triple, linking, metric)",
        "",
        "initial_state / probe: [x0, ..., x(n-1)] | \"axis1\" | \"axis2\" | \"axis3\" | \"beltrami\" (torus) | {\"seed\": u64, \"norm\": r}",
    ]
    .join("\n")
        + "\n"
}

fn output_dir(config: &RunConfig, output: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = output.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir.clone());
    fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    output::write(dir, name, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", dir.join(name).display())))
}

#[derive(Serialize)]
struct Invariants {
    energy: f64,
    helicity: f64,
    probe_linking: Option<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    version: &'static str,
    config: &'a RunConfig,
    dim: usize,
    steps: usize,
    records: usize,
    initial: Option<Invariants>,
    #[serde(rename = "final")]
    last: Option<Invariants>,
    max_energy_drift: f64,
    max_helicity_drift: f64,
    max_probe_linking_drift: Option<f64>,
    failed: bool,
    failure: Option<&'a NumericalFailure>,
    projection_failures: usize,
    projection_fallbacks: usize,
}

pub fn cmd_simulate(
    config_path: &Path,
    output: Option<&Path>,
    overrides: &[String],
    seed_override: Option<&str>,
) -> Result<(), CliError> {
    let mut config = load_config(config_path, overrides, seed_override)?;
    if let Some(dir) = output {
        config.output_dir = dir.to_path_buf();
    }
    let spec = config.integrator.ok_or_else(|| CliError::Config("simulate needs an integrator section".into()))?;
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let state = config
        .initial_state
        .as_ref()
        .ok_or_else(|| CliError::Config("simulate needs an initial_state".into()))?;
    let inst = build_instance(&config.instance)?;
    let x0 = build_state(&inst, state, "initial_state")?;
    let z0 = config.probe.as_ref().map(|p| build_state(&inst, p, "probe")).transpose()?;
    let dir = output_dir(&config, None)?;

    let trace = integrate(&inst.algebra, &x0, &spec, z0.as_ref()).map_err(|e| CliError::Config(e.to_string()))?;
    let dim = inst.algebra.dim();
    write_file(&dir, "trace.csv", &output::trace_csv(&trace.records))?;
    write_file(&dir, "state.csv", &output::state_csv(dim, &trace.records))?;

    let inv = |r: &crate::integrators::TraceRecord| Invariants { energy: r.energy, helicity: r.helicity, probe_linking: r.probe_linking };
    let summary = Summary {
        version: VERSION,
        config: &config,
        dim,
        steps: trace.steps,
        records: trace.records.len(),
        initial: trace.records.first().map(inv),
        last: trace.last().map(inv),
        max_energy_drift: trace.max_energy_drift(),
        max_helicity_drift: trace.max_helicity_drift(),
        max_probe_linking_drift: trace.max_probe_linking_drift(),
        failed: trace.failure.is_some(),
        failure: trace.failure.as_ref(),
        projection_failures: trace.projection_failures,
        projection_fallbacks: trace.projection_fallbacks,
    };
    write_file(&dir, "summary.json", &output::json_text(&summary))?;
    match &trace.failure {
        Some(f) => Err(CliError::Numerical(format!("{} (outputs up to t = {} written)", f.message, f.t))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct DiagnosticsFile<'a> {
    version: &'static str,
    config: &'a RunConfig,
    validation: &'a ValidationReport,
    #[serde(flatten)]
    report: &'a DiagnosticsReport,
}

pub fn cmd_diagnose(config_path: &Path, output: Option<&Path>, seed_override: Option<&str>) -> Result<(), CliError> {
    let mut config = load_config(config_path, &[], seed_override)?;
    if let Some(dir) = output {
        config.output_dir = dir.to_path_buf();
    }
    let inst = build_instance(&config.instance)?;
    let dir = output_dir(&config, None)?;
    let settings = DiagnosticsSettings {
        samples: config.diagnostics.samples,
        seed: config.diagnostics.seed,
        jacobi_tolerance: config.instance.is_lie().then_some(LIE_JACOBI_TOLERANCE),
    };
    let report = run_diagnostics(&inst.algebra, &settings).map_err(|e| CliError::Numerical(e.to_string()))?;
    let validation = validate(&inst.algebra, VALIDATION_TOL);
    let file = DiagnosticsFile { version: VERSION, config: &config, validation: &validation, report: &report };
    write_file(&dir, "diagnostics.json", &output::json_text(&file))?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.identities.iter().filter(|r| !r.passed).map(|r| r.name).collect();
        Err(CliError::Validation(format!("identities failed: {}", failed.join(", "))))
    }
}
