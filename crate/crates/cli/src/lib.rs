//! Command-line front end: argument parsing, configuration, file formats
//! and report emission for `arveson-core`.

pub mod commands;
pub mod config;
pub mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use arveson_core::report::{Check, Status};
use clap::{Args, Parser};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::commands::Command;
use crate::config::{ConfigFile, JobConfig};
use crate::io::InputError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "arveson", version, about = "Realizations of Schur-class multipliers on the unit ball")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON file with default settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for all sampled points and random test vectors.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sampled points per certificate.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Radius of the sampling ball, in (0, 1).
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    /// Eigenvalue floor for positivity certificates.
    #[arg(long, global = true)]
    pub tol_psd: Option<f64>,
    /// Residual bound for asserted identities.
    #[arg(long, global = true)]
    pub tol_eq: Option<f64>,
    /// Worker threads for point sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Path for the machine-readable JSON report.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl GlobalArgs {
    fn as_settings(&self) -> ConfigFile {
        ConfigFile {
            seed: self.seed,
            samples: self.samples,
            radius: self.radius,
            tol_rank: self.tol_rank,
            tol_psd: self.tol_psd,
            tol_eq: self.tol_eq,
            threads: self.threads,
            out: self.out.clone(),
        }
    }
}

/// The JSON report written to `--out`.
#[derive(Debug, Serialize)]
pub struct MachineReport {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub seed: u64,
    pub status: Status,
    pub checks: Vec<Check>,
    pub artifacts: Map<String, Value>,
}

pub fn resolve(cli: &Cli) -> Result<JobConfig, InputError> {
    let file = match &cli.global.config {
        Some(path) => ConfigFile::read(path)?,
        None => ConfigFile::default(),
    };
    JobConfig::resolve(cli.command.name(), cli.command.inputs(), file.overlay(cli.global.as_settings()))
}

/// Run one parsed invocation; returns the machine report and the text report.
pub fn execute(cli: &Cli) -> Result<(MachineReport, String), InputError> {
    let job = resolve(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.threads)
        .build()
        .map_err(|e| InputError::Config(e.to_string()))?;
    let outcome = pool.install(|| commands::run(&cli.command, &job.sampling))?;
    let text = outcome.report.to_text();
    let machine = MachineReport {
        command: job.command.clone(),
        inputs: job.inputs.clone(),
        seed: job.sampling.seed,
        status: outcome.report.status(),
        checks: outcome.report.checks,
        artifacts: outcome.artifacts,
    };
    if let Some(path) = &job.out {
        io::write_json(path, &machine)?;
    }
    Ok((machine, text))
}

/// Parse arguments, run, print the text report and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok((machine, text)) => {
            print!("{text}");
            if machine.status == Status::Fail {
                EXIT_FAIL
            } else {
                EXIT_PASS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
