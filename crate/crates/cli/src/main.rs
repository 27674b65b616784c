//! Command-line experiment runner: loads a TOML experiment config, runs it
//! and writes one CSV result table.

use chebgreeks::harness::{run_experiment, ExperimentConfig, EXPERIMENTS};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Seed override for CI runs; the --seed flag takes precedence.
const SEED_ENV: &str = "CHEBGREEKS_SEED";

#[derive(Parser)]
#[command(
    name = "chebgreeks",
    version,
    about = "Chebyshev and finite-difference Monte Carlo Greeks experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Experiment config (TOML).
        config: PathBuf,
        /// Output CSV path (default: the config's `output`, else
        /// `<experiment>.csv` in the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker thread count (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the available experiments.
    ListExperiments,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for (name, description) in EXPERIMENTS {
                println!("{name:<18} {description}");
            }
            Ok(())
        }
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| format!("thread pool: {e}"))?;
            }
            let mut cfg = ExperimentConfig::from_path(&config)
                .map_err(|e| format!("{}: {e}", config.display()))?;
            let env_seed = std::env::var(SEED_ENV)
                .ok()
                .map(|s| {
                    s.parse::<u64>()
                        .map_err(|_| format!("{SEED_ENV}={s} is not a valid u64"))
                })
                .transpose()?;
            if let Some(s) = seed.or(env_seed) {
                cfg.mc.seed = s;
            }
            let table = run_experiment(&cfg).map_err(|e| e.to_string())?;
            let out_path = out
                .or_else(|| cfg.output.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.experiment.name())));
            table
                .write_to(&out_path)
                .map_err(|e| format!("writing {}: {e}", out_path.display()))?;
            println!("wrote {}", out_path.display());
            Ok(())
        }
    }
}
