//! `lugre-pinn` command-line driver.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;

#[derive(Debug, Parser)]
#[command(name = "lugre-pinn", version, about = "Physics-informed LuGre friction estimation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

/// Flags accepted by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML file with [generate], [train], [identify] and [evaluate] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Record wall-clock times. Off by default so CSVs are reproducible.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Simulate the pendulum-on-a-box training set.
    Generate {
        /// Noise fraction of each channel's standard deviation; 0 writes clean data only.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Train one variant, or all four.
    Train {
        /// bb1, bb2, pe1, pe2 or all.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Training CSV (default: <out>/train_noisy.csv, then train_clean.csv).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Identify LuGre parameters with the classical baselines.
    Identify {
        /// nelder-mead, ga, nls or all.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Trained PE model whose scalars are added as a row.
        #[arg(long = "model")]
        models: Vec<PathBuf>,
    },
    /// Score trained models.
    Evaluate {
        /// insim, online, transfer, steady-map, pareto or all.
        #[arg(long)]
        mode: Option<String>,
        /// 1 (swing) or 2 (translation); both when omitted.
        #[arg(long)]
        traj: Option<u8>,
        #[arg(long)]
        noise: Option<f64>,
        /// Model files (default: every <out>/{bb1,bb2,pe1,pe2}.model present).
        #[arg(long = "model")]
        models: Vec<PathBuf>,
        /// identify.csv used by the pareto mode.
        #[arg(long)]
        ident: Option<PathBuf>,
    },
    /// Print and save a summary of the CSVs in the output directory.
    Report,
}

/// Failure kinds with distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<lugre_pinn::Error> for CliError {
    fn from(e: lugre_pinn::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.common.config {
        Some(p) => Config::load(p).map_err(CliError::Usage)?,
        None => Config::default(),
    };
    std::fs::create_dir_all(&cli.common.out)?;
    let c = &cli.common;
    match cli.command {
        Cmd::Generate { noise } => commands::generate(c, &config, noise),
        Cmd::Train { variant, epochs, data } => commands::train(c, &config, variant, epochs, data),
        Cmd::Identify { method, data, models } => commands::identify(c, &config, method, data, &models),
        Cmd::Evaluate { mode, traj, noise, models, ident } => {
            commands::evaluate(c, &config, mode, traj, noise, models, ident)
        }
        Cmd::Report => commands::report(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
