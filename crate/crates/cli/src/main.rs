//! Experiment driver: train policies, score and replay them, run the
//! exact solvers, and demo the layered generator.

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::oracle::Solver;
use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "cepomdp", version, about = "Policy search for partially observable worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy and write the run artifacts.
    Train {
        /// Experiment configuration file (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Named built-in configuration.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory for policy.json, history.csv, summary.json,
        /// manifest.json.
        #[arg(long)]
        out: PathBuf,
        /// Override the training seed from the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate the score of a saved policy.
    Eval {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Override the number of evaluation rollouts.
        #[arg(long)]
        rollouts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay one episode and dump the trajectory.
    Rollout {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a world file exactly.
    Oracle {
        #[arg(long)]
        world: PathBuf,
        #[arg(long)]
        horizon: usize,
        #[arg(long, value_enum)]
        solver: Solver,
    },
    /// Compare the two layered-generator interpreters on a spec file.
    HhmmDemo {
        #[arg(long)]
        spec: PathBuf,
        /// Enumerate the sequence law up to this length.
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        /// Number of sampled runs to show.
        #[arg(long, default_value_t = 5)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train {
            config,
            preset,
            out,
            seed,
        } => {
            let mut config = ExperimentConfig::resolve(config.as_deref(), preset.as_deref())?;
            if let Some(seed) = seed {
                config.ce.seed = seed;
            }
            commands::train::run(config, &out)
        }
        Command::Eval {
            policy,
            config,
            preset,
            rollouts,
            seed,
        } => {
            let config = ExperimentConfig::resolve(config.as_deref(), preset.as_deref())?;
            commands::eval::run(config, &policy, rollouts, seed)
        }
        Command::Rollout {
            policy,
            config,
            preset,
            seed,
            out,
        } => {
            let config = ExperimentConfig::resolve(config.as_deref(), preset.as_deref())?;
            commands::rollout::run(config, &policy, seed, &out)
        }
        Command::Oracle {
            world,
            horizon,
            solver,
        } => commands::oracle::run(&world, horizon, solver),
        Command::HhmmDemo {
            spec,
            max_len,
            samples,
            seed,
        } => commands::hhmm_demo::run(&spec, max_len, samples, seed),
    }
}
