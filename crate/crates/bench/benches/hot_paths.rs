//! Throughput checks for the paths training spends its time in: episode
//! sampling, the maximum-likelihood refit, the belief-space solver and a
//! whole training iteration.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cepomdp_core::pomdp::{random_policy_params, random_world, RandomEval};
use cepomdp_core::{
    ml_update, pomdp_belief_dp, run_ce, sample_episode, CeConfig, Episode, GenerativeSource,
    HhmmStructure, TrackingCase, TrackingEnv,
};

fn tracking_episode(c: &mut Criterion) {
    let env = TrackingEnv::standard(TrackingCase::Roaming);
    let structure = HhmmStructure::new(vec![16, 16], 16, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let policy = random_policy_params(&mut rng, &structure);
    let horizon = 100;

    let mut group = c.benchmark_group("sample");
    group.throughput(Throughput::Elements(horizon as u64));
    group.bench_function("tracking_episode_100_steps", |b| {
        b.iter(|| {
            let episode = sample_episode(&env, &policy, horizon, &mut rng).unwrap();
            black_box(episode.score)
        })
    });
    group.finish();
}

fn ml_refit(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let world = random_world(&mut rng, 3, 3, 3, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
    let structure = HhmmStructure::new(vec![4, 4], 3, 3).unwrap();
    let policy = random_policy_params(&mut rng, &structure);
    let episodes: Vec<Episode> = (0..250)
        .map(|_| sample_episode(&world, &policy, 6, &mut rng).unwrap())
        .collect();
    let refs: Vec<&Episode> = episodes.iter().collect();

    let mut group = c.benchmark_group("update");
    group.throughput(Throughput::Elements(episodes.len() as u64));
    group.bench_function("ml_update_250_episodes", |b| {
        b.iter(|| black_box(ml_update(&structure, &refs, 0.0, &policy).unwrap()))
    });
    group.finish();
}

fn belief_solver(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let world = random_world(&mut rng, 3, 3, 3, RandomEval::ActionState { lo: 0.0, hi: 1.0 });

    c.bench_function("belief_dp_3z3x3y_horizon_4", |b| {
        b.iter(|| black_box(pomdp_belief_dp(&world, 4, 1_000_000).unwrap().value))
    });
}

fn training_iteration(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let world = random_world(&mut rng, 3, 3, 3, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
    let structure = HhmmStructure::new(vec![4, 4], 3, 3).unwrap();
    // One sample/select/refit round plus the final evaluation pass.
    let config = CeConfig {
        samples_per_iteration: 500,
        selective_rate: 0.5,
        horizon: 6,
        patience: 1,
        max_iterations: 1,
        smoothing: 0.0,
        seed: 15,
        evaluation_rollouts: 100,
    };

    c.bench_function("ce_iteration_500_samples", |b| {
        b.iter_batched(
            || GenerativeSource(world.clone()),
            |source| black_box(run_ce(&source, &structure, &config).unwrap().best_mean_score),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    tracking_episode,
    ml_refit,
    belief_solver,
    training_iteration
);
criterion_main!(benches);
