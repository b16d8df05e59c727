//! `liouville`: experiment driver for Lindbladian spectral analysis.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.

mod artifacts;
mod config;
mod export;
mod plot;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "liouville", version, about = "Lindbladian spectra, stripes, ETH statistics, and dynamics")]
struct Cli {
    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for disorder realizations (default: hardware parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override the config's output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment config and write its artifacts.
    Run { config: PathBuf },
    /// Produce per-figure plot data and SVG from a completed run.
    Export { run_dir: PathBuf, figure_id: String },
    /// Parse and validate a config without running anything.
    Validate { config: PathBuf },
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn load_config(path: &PathBuf, cli: &Cli) -> Result<ExperimentConfig, u8> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    let mut cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid config {}: {e}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.output {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Validate { config } => match load_config(config, &cli) {
            Ok(_) => {
                println!("ok: {} is valid", config.display());
                ExitCode::SUCCESS
            }
            Err(code) => ExitCode::from(code),
        },
        Command::Run { config } => {
            let cfg = match load_config(config, &cli) {
                Ok(c) => c,
                Err(code) => return ExitCode::from(code),
            };
            match runner::run_experiment(&cfg, cli.workers) {
                Ok(outcome) => {
                    println!(
                        "run complete: {} realizations ({} failed) -> {}",
                        outcome.completed,
                        outcome.failed,
                        outcome.output_dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
        Command::Export { run_dir, figure_id } => match export::export_figure(run_dir, figure_id) {
            Ok(csv) => {
                println!("exported {figure_id} -> {}", csv.display());
                ExitCode::SUCCESS
            }
            Err(export::ExportError::UnknownFigure(id)) => {
                eprintln!("error: unknown figure id {id}");
                ExitCode::from(EXIT_CONFIG)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_RUNTIME)
            }
        },
    }
}
