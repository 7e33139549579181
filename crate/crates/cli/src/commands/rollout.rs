//! Replay one episode of a saved policy and dump the trajectory, both as
//! rendered frames and as CSV.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use cepomdp_core::rng::{episode_rng, StreamSpace};
use cepomdp_core::{deserialize_policy, sample_episode};

use crate::config::{ExperimentConfig, LoadedEnv};

pub fn run(
    config: ExperimentConfig,
    policy_path: &Path,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let text = fs::read_to_string(policy_path)
        .with_context(|| format!("reading policy {}", policy_path.display()))?;
    let policy = deserialize_policy(&text)
        .with_context(|| format!("parsing policy {}", policy_path.display()))?;

    let loaded = config.build_env()?;
    crate::commands::eval::check_policy_alphabet(policy.structure(), &loaded)?;
    let LoadedEnv::Tracking(env) = loaded else {
        bail!("rollout rendering needs a tracking environment");
    };
    let seed = seed.unwrap_or(config.ce.seed);
    let mut rng = episode_rng(seed, StreamSpace::Rollout, 0, 0);
    let episode = sample_episode(&env, &policy, config.ce.horizon, &mut rng)?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("trajectory.txt"), env.trajectory_frames(&episode)?)?;
    fs::write(out.join("trajectory.csv"), env.trajectory_csv(&episode)?)?;
    println!("score {} over {} steps", episode.score, episode.horizon());
    println!("wrote trajectory.txt, trajectory.csv");
    Ok(())
}
