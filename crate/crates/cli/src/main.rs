//! `torus-ns`: batch front end for the spectral Navier-Stokes laboratory.
//!
//! Exit codes: 0 success, 1 error, 2 a run that did not converge, 3 a failed
//! verification property.

mod compare;
mod config;
mod output;
mod run;
mod verify;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use torus_ns::analysis::classify_data;
use torus_ns::spectral::read_field;
use torus_ns::stepper::Verdict;

use config::RunConfig;
use verify::Suite;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Core(torus_ns::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid config: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<torus_ns::Error> for CliError {
    fn from(e: torus_ns::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser)]
#[command(name = "torus-ns", version, about = "Fourier-mode Navier-Stokes laboratory on the n-torus")]
struct Cli {
    /// Directory for artifacts (created if missing).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for random presets and benches.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scheme and write trajectory, diagnostics and summary.
    Run { config: PathBuf },
    /// Run a property bench and write its report.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Compare forward Euler and Trotter against a four-stage oracle.
    Compare { config: PathBuf },
    /// Classify a field file by its fitted decay index.
    Classify { field: PathBuf },
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.apply_seed(s);
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let flag_dir = cli.out_dir.as_deref();
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config, cli.seed)?;
            let out = cfg.out_dir(flag_dir);
            prepare(&out)?;
            let summary = run::cmd_run(&cfg, &out, cli.seed)?;
            println!("verdict: {:?}", summary.verdict());
            Ok(if summary.verdict() == Verdict::Converged { 0 } else { 2 })
        }
        Command::Verify { suite } => {
            let out = flag_dir.map_or_else(|| PathBuf::from("torus-ns-out"), Path::to_path_buf);
            prepare(&out)?;
            let report = verify::cmd_verify(suite, cli.seed.unwrap_or(0), &out)?;
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: {} (tolerance {})", c.case, c.value, c.tolerance);
            }
            println!("{}: {}", report.suite, if report.pass { "pass" } else { "fail" });
            Ok(if report.pass { 0 } else { 3 })
        }
        Command::Compare { config } => {
            let cfg = load(&config, cli.seed)?;
            let out = cfg.out_dir(flag_dir);
            prepare(&out)?;
            let summary = compare::cmd_compare(&cfg, &out)?;
            Ok(if summary.diverged { 2 } else { 0 })
        }
        Command::Classify { field } => {
            let h = read_field(&field)?;
            let c = classify_data(&h)?;
            let out = flag_dir.map_or_else(|| PathBuf::from("torus-ns-out"), Path::to_path_buf);
            prepare(&out)?;
            output::write_json(&out, "classification.json", &c)?;
            println!("{:?} (s = {})", c.verdict, c.profile.s_estimate);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1; clap's default of 2 would read as "not converged".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
