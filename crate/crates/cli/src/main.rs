//! Operator entry point: configure, launch and evaluate experiments, and
//! export plot-ready data.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use auv_core::Error;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "auv", version, about = "6-DOF underwater vehicle path-following experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy and write curves plus checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the training mode (end_to_end, pid_assist_rudder,
        /// pid_assist_elevator, velocity_only).
        #[arg(long)]
        mode: Option<String>,
        /// Enable or disable the ocean-current disturbance.
        #[arg(long)]
        current: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run deterministic evaluation episodes on the fixed test path.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Policy checkpoint; repeat for combined mode (rudder first,
        /// then elevator). Omit for the pid_only baseline.
        #[arg(long)]
        checkpoint: Vec<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        current: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of evaluation episodes.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Derive per-figure CSVs from a finished run directory.
    Plotdata {
        /// The run directory to read from and write into.
        #[arg(long)]
        out: PathBuf,
    },
}

fn apply_overrides(
    config: &mut RunConfig,
    seed: Option<u64>,
    mode: Option<String>,
    current: Option<String>,
    out: Option<PathBuf>,
) -> auv_core::Result<()> {
    if let Some(seed) = seed {
        config.apply("run.seed", &seed.to_string())?;
    }
    if let Some(mode) = mode {
        config.apply("run.mode", &mode)?;
    }
    if let Some(current) = current {
        config.apply("run.current", &current)?;
    }
    if let Some(out) = out {
        config.apply("run.out", &out.display().to_string())?;
    }
    Ok(())
}

fn run(cli: Cli) -> auv_core::Result<()> {
    match cli.command {
        Command::Train {
            config,
            seed,
            mode,
            current,
            out,
        } => {
            let mut run_config = RunConfig::from_file(&config)?;
            apply_overrides(&mut run_config, seed, mode, current, out)?;
            commands::cmd_train(&run_config)
        }
        Command::Eval {
            config,
            checkpoint,
            seed,
            mode,
            current,
            out,
            episodes,
        } => {
            let mut run_config = RunConfig::from_file(&config)?;
            apply_overrides(&mut run_config, seed, mode, current, out)?;
            if let Some(episodes) = episodes {
                run_config.apply("eval.episodes", &episodes.to_string())?;
            }
            commands::cmd_eval(&run_config, &checkpoint)
        }
        Command::Plotdata { out } => commands::cmd_plotdata(&out),
    }
}

fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) | Error::ShapeMismatch { .. } | Error::Io(_) => 1,
        Error::SingularAttitude { .. }
        | Error::NonPositiveDefinite
        | Error::NumericalDivergence { .. }
        | Error::NonFiniteLoss => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        std::process::exit(exit_code(&error));
    }
}
