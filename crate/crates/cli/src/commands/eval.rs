//! Score a saved policy on an environment and print the estimate.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;

use cepomdp_core::{deserialize_policy, estimate_policy_value, Environment, HhmmStructure};

use crate::config::{ExperimentConfig, LoadedEnv};

/// A saved policy records its own alphabets; refuse to score it against an
/// environment with different ones.
pub fn check_policy_alphabet(structure: &HhmmStructure, env: &LoadedEnv) -> Result<()> {
    if structure.num_actions != env.num_actions() || structure.num_observations != env.num_observations() {
        anyhow::bail!(
            "policy is wired for {} actions / {} observations but the environment has {} / {}",
            structure.num_actions,
            structure.num_observations,
            env.num_actions(),
            env.num_observations()
        );
    }
    Ok(())
}

pub fn run(
    config: ExperimentConfig,
    policy_path: &Path,
    rollouts: Option<usize>,
    seed: Option<u64>,
) -> Result<()> {
    let text = fs::read_to_string(policy_path)
        .with_context(|| format!("reading policy {}", policy_path.display()))?;
    let policy = deserialize_policy(&text)
        .with_context(|| format!("parsing policy {}", policy_path.display()))?;

    let env = config.build_env()?;
    check_policy_alphabet(policy.structure(), &env)?;
    let rollouts = rollouts.unwrap_or(config.ce.evaluation_rollouts);
    let seed = seed.unwrap_or(config.ce.seed);
    let estimate = estimate_policy_value(&env, &policy, config.ce.horizon, rollouts, seed)?;
    println!(
        "{}",
        json!({
            "mean": estimate.mean,
            "std_error": estimate.std_error,
            "rollouts": estimate.rollouts,
        })
    );
    Ok(())
}
