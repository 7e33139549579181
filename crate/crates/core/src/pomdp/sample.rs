//! Episode sampling and Monte-Carlo policy evaluation.

use rand::RngCore;
use rayon::prelude::*;

use super::{Environment, Episode, Policy, SampleError};
use crate::policy::MemoryVector;
use crate::rng::{episode_rng, StreamSpace};

pub(crate) fn check_compat<E, P>(env: &E, policy: &P) -> Result<(), SampleError>
where
    E: Environment + ?Sized,
    P: Policy + ?Sized,
{
    if policy.num_actions() != env.num_actions() {
        return Err(SampleError::CardinalityMismatch {
            kind: "action",
            policy: policy.num_actions(),
            world: env.num_actions(),
        });
    }
    if policy.num_observations() != env.num_observations() {
        return Err(SampleError::CardinalityMismatch {
            kind: "observation",
            policy: policy.num_observations(),
            world: env.num_observations(),
        });
    }
    Ok(())
}

/// Run one episode. Draw order within a step is fixed (policy, state,
/// observation), so a given generator always produces the same episode.
pub fn sample_episode<E, P>(
    env: &E,
    policy: &P,
    horizon: usize,
    rng: &mut dyn RngCore,
) -> Result<Episode, SampleError>
where
    E: Environment + ?Sized,
    P: Policy + ?Sized,
{
    if horizon == 0 {
        return Err(SampleError::ZeroHorizon);
    }
    check_compat(env, policy)?;

    let mut actions = Vec::with_capacity(horizon);
    let mut observations = Vec::with_capacity(horizon);
    let mut states = Vec::with_capacity(horizon);
    let mut memories: Vec<MemoryVector> = Vec::with_capacity(horizon);
    let mut acc = env.eval_init();

    for t in 1..=horizon {
        let (memory, action) = {
            let prev_memory = memories.last();
            let prev_observation = observations.last().copied();
            policy.sample_step(prev_memory, prev_observation, rng)
        };
        let state = match t {
            1 => env.draw_initial(rng),
            _ => env.draw_step(states[t - 2], actions[t - 2], rng),
        };
        let observation = env.draw_observation(state, rng);
        acc = env.eval_step(t, horizon, action, observation, state, acc);
        actions.push(action);
        observations.push(observation);
        states.push(state);
        memories.push(memory);
    }

    Ok(Episode {
        actions,
        observations,
        states: Some(states),
        memories,
        score: acc,
    })
}

/// Mean and standard error of a policy's score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub rollouts: usize,
}

/// Monte-Carlo estimate over independent rollouts. Rollout i draws from the
/// evaluation stream (seed, i), so the result does not depend on how rayon
/// schedules the work.
pub fn estimate_policy_value<E, P>(
    env: &E,
    policy: &P,
    horizon: usize,
    rollouts: usize,
    seed: u64,
) -> Result<ValueEstimate, SampleError>
where
    E: Environment + ?Sized,
    P: Policy + Sync + ?Sized,
{
    if rollouts < 2 {
        return Err(SampleError::TooFewRollouts(rollouts));
    }
    if horizon == 0 {
        return Err(SampleError::ZeroHorizon);
    }
    check_compat(env, policy)?;

    let scores: Vec<f64> = (0..rollouts)
        .into_par_iter()
        .map(|i| {
            let mut rng = episode_rng(seed, StreamSpace::Evaluation, 0, i as u64);
            sample_episode(env, policy, horizon, &mut rng)
                .expect("compatibility checked above")
                .score
        })
        .collect();

    let mean = scores.iter().sum::<f64>() / rollouts as f64;
    let ss = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>();
    let std_error = (ss / (rollouts as f64 * (rollouts as f64 - 1.0))).sqrt();
    Ok(ValueEstimate {
        mean,
        std_error,
        rollouts,
    })
}
