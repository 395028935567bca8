//! Command-line driver for averaging experiments.
//!
//! ```text
//! kbavg <resonant-part|average|simulate|convergence|hamiltonian-drift>
//!       --config <file> [--out <dir>] [--seed <u64>] [--threads <k>]
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure. Errors
//! are reported on stderr as a single line `error: <kind>: <reason>`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use kbavg::exec::Execution;

use crate::commands::RunContext;
use crate::config::{ExperimentConfig, Study};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
        }
    }

    /// `error: <kind>: <reason>` on a single line.
    pub fn one_line(&self) -> String {
        let reason = self.to_string().replace(['\n', '\r'], " ");
        format!("error: {}: {}", self.kind(), reason)
    }
}

impl From<kbavg::Error> for CliError {
    fn from(e: kbavg::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kbavg", version, about = "Krylov-Bogolyubov averaging experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; overrides the config's output_dir.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for sampled points and random fields; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for the parallel loops.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Resonance table and resonant part of a polynomial field.
    ResonantPart,
    /// Symbolic and numeric averages at sample points.
    Average,
    /// Integrate one equation form per epsilon.
    Simulate,
    /// Distance between interaction and effective solutions across epsilon.
    Convergence,
    /// Action drift of a non-resonant Hamiltonian system.
    HamiltonianDrift,
}

impl Command {
    pub fn study(self) -> Study {
        match self {
            Command::ResonantPart => Study::ResonantPart,
            Command::Average => Study::Average,
            Command::Simulate => Study::Simulate,
            Command::Convergence => Study::Convergence,
            Command::HamiltonianDrift => Study::HamiltonianDrift,
        }
    }
}

/// Runs a parsed command line and returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <file> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    let study = cli.command.study();
    cfg.check_study(study)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = RunContext {
        out_dir,
        exec: Execution::default(),
    };
    match cli.threads {
        None => commands::run_study(study, &cfg, &ctx),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {k} threads: {e}")))?;
            pool.install(|| commands::run_study(study, &cfg, &ctx))
        }
    }
}

/// Parses `args`, runs, reports, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
            let first = first.trim_start_matches("error: ").to_string();
            eprintln!("{}", CliError::Config(first).one_line());
            return EXIT_CONFIG;
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.one_line());
            e.exit_code()
        }
    }
}
