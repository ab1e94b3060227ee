use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use roughwalk_cli::config::{ConfigError, ExperimentConfig, Overrides};
use roughwalk_cli::harness::{self, Command, HarnessError, WORKERS_ENV};

/// Monte Carlo experiments on lifted random walks.
#[derive(Parser)]
#[command(name = "roughwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Generate replica paths and write path records.
    Simulate(RunArgs),
    /// Simulate, decompose into regeneration blocks and estimate (v, M, Γ).
    Estimate(RunArgs),
    /// Hölder norms, Kolmogorov ratios and duration tails across scales.
    Diagnose(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config and the ROUGHWALK_WORKERS variable.
    #[arg(long)]
    workers: Option<usize>,
}

fn env_workers() -> Result<Option<usize>, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(Some(w)),
            _ => Err(ConfigError::Key { key: WORKERS_ENV.into(), msg: format!("expected a positive integer, got `{v}`") }),
        },
    }
}

fn execute(cmd: Command, args: RunArgs) -> Result<harness::Report, HarnessError> {
    let workers = match args.workers {
        Some(w) => Some(w),
        None => env_workers()?,
    };
    let overrides = Overrides { seed: args.seed, replicas: args.replicas, steps: args.steps, out: args.out, workers };
    let cfg = ExperimentConfig::from_file(&args.config, &overrides)?;
    harness::run(cmd, &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Estimate(a) => (Command::Estimate, a),
        Sub::Diagnose(a) => (Command::Diagnose, a),
    };
    match execute(cmd, args) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            println!("manifest: {}", report.manifest.display());
            if let Some(w) = &report.under_sampled {
                eprintln!("warning: {w}");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
