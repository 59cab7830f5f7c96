//! `csflab`: runs α-flow scenarios and writes their artifacts.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "csflab", version, about = "Alpha-curve-shortening flow between parallel lines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the translating soliton profile and its metadata.
    Soliton {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value = "soliton")]
        out: PathBuf,
    },
    /// Evolve the configured initial data and run the configured checks.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Re-run checks on the trace stored in a run directory.
    Check {
        run_dir: PathBuf,
        /// Take the check list from this configuration instead of the
        /// run's own.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// One run per α, executed in parallel, plus a summary table.
    Sweep {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        alphas: Vec<f64>,
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to the number of logical cores.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

/// Command-line values that replace the corresponding config fields.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CSFLAB_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Soliton { alpha, n, out } => commands::soliton(alpha, n, &out),
        Command::Evolve { config, overrides } => commands::evolve(&config, &overrides),
        Command::Check { run_dir, config } => commands::check(&run_dir, config.as_deref()),
        Command::Sweep {
            alphas,
            config,
            jobs,
            overrides,
        } => commands::sweep(&alphas, &config, jobs, &overrides),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("csflab: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
