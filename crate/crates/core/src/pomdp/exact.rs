//! Exact policy value by total enumeration.

use thiserror::Error;

use super::sample::check_compat;
use super::{Environment, Policy, SampleError, WorldModel};
use crate::policy::MemoryVector;

/// Default ceiling on the enumeration size estimate.
pub const DEFAULT_EXACT_TERM_CAP: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("enumeration would touch about {estimated_terms} terms (cap {cap})")]
    TooLarge { estimated_terms: u64, cap: u64 },
}

/// Expected score of `policy` on `world` over `horizon` steps, summed over
/// every (action, observation, state, memory) trajectory.
///
/// The size estimate is (actions x observations x states x joint memory)
/// raised to the horizon; anything above `max_terms` is refused rather than
/// attempted.
pub fn exact_policy_value<P>(
    world: &WorldModel,
    policy: &P,
    horizon: usize,
    max_terms: u64,
) -> Result<f64, ExactError>
where
    P: Policy + ?Sized,
{
    if horizon == 0 {
        return Err(SampleError::ZeroHorizon.into());
    }
    check_compat(world, policy)?;

    let memory_count: u64 = policy.memory_shape().iter().map(|&c| c as u64).product();
    let branch = world.num_actions() as u64
        * world.num_observations() as u64
        * world.num_states() as u64
        * memory_count;
    let mut estimated_terms: u64 = 1;
    for _ in 0..horizon {
        estimated_terms = estimated_terms.saturating_mul(branch);
    }
    if estimated_terms > max_terms {
        return Err(ExactError::TooLarge {
            estimated_terms,
            cap: max_terms,
        });
    }

    let memories = enumerate_memories(policy.memory_shape());
    let mut total = 0.0;
    let mut ctx = Ctx {
        world,
        policy,
        horizon,
        memories: &memories,
        total: &mut total,
    };
    recurse(&mut ctx, 1, None, None, None, world.eval_init(), 1.0);
    Ok(total)
}

/// All memory vectors for a shape, odometer order.
pub(crate) fn enumerate_memories(shape: &[usize]) -> Vec<MemoryVector> {
    let mut out = vec![MemoryVector(vec![0; shape.len()])];
    for (level, &card) in shape.iter().enumerate() {
        let prev = std::mem::take(&mut out);
        for m in prev {
            for v in 0..card {
                let mut next = m.clone();
                next.0[level] = v;
                out.push(next);
            }
        }
    }
    out
}

struct Ctx<'a, P: ?Sized> {
    world: &'a WorldModel,
    policy: &'a P,
    horizon: usize,
    memories: &'a [MemoryVector],
    total: &'a mut f64,
}

fn recurse<P>(
    ctx: &mut Ctx<'_, P>,
    t: usize,
    prev_state_action: Option<(usize, usize)>,
    prev_memory: Option<&MemoryVector>,
    prev_observation: Option<usize>,
    acc: f64,
    weight: f64,
) where
    P: Policy + ?Sized,
{
    if t > ctx.horizon {
        *ctx.total += weight * acc;
        return;
    }
    for memory in ctx.memories {
        for action in 0..ctx.world.num_actions() {
            let p_step = ctx
                .policy
                .step_prob(prev_memory, prev_observation, memory, action);
            if p_step == 0.0 {
                continue;
            }
            let state_law = ctx.world.state_law(prev_state_action);
            for (state, &p_state) in state_law.iter().enumerate() {
                if p_state == 0.0 {
                    continue;
                }
                let obs_law = ctx.world.observation_law(state);
                for (observation, &p_obs) in obs_law.iter().enumerate() {
                    if p_obs == 0.0 {
                        continue;
                    }
                    let acc_next =
                        ctx.world
                            .evaluation()
                            .step(t, ctx.horizon, action, observation, state, acc);
                    recurse(
                        ctx,
                        t + 1,
                        Some((state, action)),
                        Some(memory),
                        Some(observation),
                        acc_next,
                        weight * p_step * p_state * p_obs,
                    );
                }
            }
        }
    }
}
