//! `bpl`: batch driver for minimal-rate jump process experiments.
//!
//! ```text
//! bpl run <config.json> [--seed N] [--out DIR] [--jobs N]
//! bpl describe <TWO_LEVEL|LATTICE_1D|FOCK|DIRAC> [--config FILE]
//! ```
//!
//! Exit status: 0 when every requested check passes, 1 when a check fails
//! (the report is still written) or the run errors, 2 for invalid input.

mod config;
mod describe;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, ModelConfig};

#[derive(Parser)]
#[command(name = "bpl", version, about = "Minimal-rate jump process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Overrides `sampler.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads (default: available cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print a model card.
    Describe {
        model: String,
        /// Take the model parameters from this config instead of the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn invalid(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BPL_LOG", "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, out, jobs } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok((cfg, _)) => cfg,
                Err(e) => return invalid(e),
            };
            if let Some(seed) = seed {
                cfg.sampler.seed = seed;
            }
            if let Some(n) = jobs {
                if n == 0 {
                    return invalid("--jobs must be at least 1");
                }
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return invalid(e);
                }
            }
            match run::run(&cfg, &out) {
                Ok(report) => {
                    for c in &report.checks {
                        println!(
                            "{} {}: empirical {:.6e}, theoretical {:.6e}, tolerance {:.3e}",
                            if c.passed { "PASS" } else { "FAIL" },
                            c.name,
                            c.empirical,
                            c.theoretical,
                            c.tolerance
                        );
                    }
                    if report.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Describe { model, config } => {
            let Some(mut m) = ModelConfig::default_for(&model) else {
                return invalid(format!("unknown model `{model}` (expected TWO_LEVEL, LATTICE_1D, FOCK or DIRAC)"));
            };
            if let Some(path) = config {
                match ExperimentConfig::load(&path) {
                    Ok((cfg, _)) if cfg.model.kind() == m.kind() => m = cfg.model,
                    Ok((cfg, _)) => {
                        return invalid(format!("{} describes model {}, not {model}", path.display(), cfg.model.kind()))
                    }
                    Err(e) => return invalid(e),
                }
            }
            match describe::describe(&m) {
                Ok(card) => {
                    print!("{card}");
                    ExitCode::SUCCESS
                }
                Err(e) => invalid(e),
            }
        }
    }
}
