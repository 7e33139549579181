//! Distribution laws of the layered policy: normalization, independence
//! structure, likelihoods, and the document format.

mod common;

use approx::assert_abs_diff_eq;
use cepomdp_core::policy::EpisodeShapeError;
use cepomdp_core::pomdp::{random_policy_params, random_world, RandomEval};
use cepomdp_core::rng::{episode_rng, StreamSpace};
use cepomdp_core::tracking::{TrackingCase, TrackingEnv};
use cepomdp_core::{
    deserialize_policy, ml_update, sample_episode, serialize_policy, HhmmStructure, MemoryVector,
    PolicyParams,
};
use common::{action_sequence_law, all_memories, bare_episode};
use proptest::prelude::*;

#[test]
fn uniform_log_prob_is_exact_on_a_long_episode() {
    // Three uniform factors per step, each over 16 outcomes.
    let env = TrackingEnv::standard(TrackingCase::Fixed);
    let structure = HhmmStructure::new(vec![16, 16], 16, 16).unwrap();
    let policy = PolicyParams::uniform(&structure);
    let mut rng = episode_rng(41, StreamSpace::Rollout, 0, 0);
    let episode = sample_episode(&env, &policy, 200, &mut rng).unwrap();
    let expected = 200.0 * 3.0 * (1.0f64 / 16.0).ln();
    assert_abs_diff_eq!(policy.log_prob(&episode).unwrap(), expected, epsilon = 1e-9);
}

#[test]
fn episode_likelihoods_sum_to_one() {
    // Fix the observations; the (memory, action) record is then a single
    // categorical law and its exponentiated log-likelihoods must add to 1.
    let structure = HhmmStructure::new(vec![2, 2], 3, 2).unwrap();
    let mut rng = episode_rng(42, StreamSpace::Rollout, 0, 0);
    let policy = random_policy_params(&mut rng, &structure);
    let observations = vec![0usize, 1, 0];
    let memories = all_memories(&structure.level_cards);

    let mut assignments: Vec<(Vec<Vec<usize>>, Vec<usize>)> = vec![(Vec::new(), Vec::new())];
    for _ in 0..observations.len() {
        let prev = std::mem::take(&mut assignments);
        for (ms, xs) in prev {
            for m in &memories {
                for x in 0..structure.num_actions {
                    let mut ms2 = ms.clone();
                    let mut xs2 = xs.clone();
                    ms2.push(m.0.clone());
                    xs2.push(x);
                    assignments.push((ms2, xs2));
                }
            }
        }
    }
    assert_eq!(assignments.len(), (4 * 3usize).pow(3));

    let mut total = 0.0;
    for (ms, xs) in assignments {
        let episode = bare_episode(xs, observations.clone(), ms, 0.0);
        total += policy.log_prob(&episode).unwrap().exp();
    }
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
}

#[test]
fn log_prob_adds_over_a_split() {
    let structure = HhmmStructure::new(vec![2, 2], 2, 2).unwrap();
    let mut rng = episode_rng(43, StreamSpace::Rollout, 0, 0);
    let policy = random_policy_params(&mut rng, &structure);
    let world = random_world(&mut rng, 3, 2, 2, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
    let episode = sample_episode(&world, &policy, 6, &mut rng).unwrap();

    let k = 2;
    let prefix = bare_episode(
        episode.actions[..k].to_vec(),
        episode.observations[..k].to_vec(),
        episode.memories[..k].iter().map(|m| m.0.clone()).collect(),
        0.0,
    );
    let mut lp = policy.log_prob(&prefix).unwrap();
    for t in (k + 1)..=6 {
        lp += policy.step_log_prob(
            Some(&episode.memories[t - 2]),
            Some(episode.observations[t - 2]),
            &episode.memories[t - 1],
            episode.actions[t - 1],
        );
    }
    // Same factors in the same order: the sums agree exactly.
    assert_eq!(lp, policy.log_prob(&episode).unwrap());
}

#[test]
fn reflex_policy_ignores_previous_memory() {
    let structure = HhmmStructure::new(vec![3], 2, 2).unwrap();
    let mut rng = episode_rng(44, StreamSpace::Rollout, 0, 0);
    let policy = random_policy_params(&mut rng, &structure);
    let memories = all_memories(&structure.level_cards);
    for y_prev in [None, Some(0), Some(1)] {
        for m in &memories {
            for x in 0..2 {
                let base = policy.step_prob(Some(&memories[0]), y_prev, m, x);
                for prev in &memories {
                    assert_eq!(policy.step_prob(Some(prev), y_prev, m, x), base);
                }
                assert_eq!(policy.step_prob(None, y_prev, m, x), base);
            }
        }
    }
}

#[test]
fn top_memory_marginal_ignores_the_observation() {
    // With two levels the top update reads only the bottom symbol of the
    // previous step; summing out (bottom, action) must erase y entirely.
    let structure = HhmmStructure::new(vec![2, 3], 2, 3).unwrap();
    let mut rng = episode_rng(45, StreamSpace::Rollout, 0, 0);
    let policy = random_policy_params(&mut rng, &structure);
    let prevs = all_memories(&structure.level_cards);
    for prev in &prevs {
        for m2 in 0..3 {
            let marginal = |y_prev: Option<usize>| -> f64 {
                let mut p = 0.0;
                for m1 in 0..2 {
                    for x in 0..2 {
                        p += policy.step_prob(
                            Some(prev),
                            y_prev,
                            &MemoryVector(vec![m1, m2]),
                            x,
                        );
                    }
                }
                p
            };
            let base = marginal(None);
            for y in 0..3 {
                assert_abs_diff_eq!(marginal(Some(y)), base, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn relabeling_memory_preserves_the_action_law() {
    // Swap the memory symbols in the training episodes; the refit policy
    // must induce the same law over action sequences.
    let structure = HhmmStructure::new(vec![2, 2], 3, 2).unwrap();
    let mut rng = episode_rng(46, StreamSpace::Rollout, 0, 0);
    let teacher = random_policy_params(&mut rng, &structure);
    let world = random_world(&mut rng, 3, 3, 2, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
    let episodes: Vec<_> = (0..40)
        .map(|i| {
            let mut r = episode_rng(46, StreamSpace::Rollout, 1, i);
            sample_episode(&world, &teacher, 4, &mut r).unwrap()
        })
        .collect();
    let relabeled: Vec<_> = episodes
        .iter()
        .map(|e| {
            let mut e2 = e.clone();
            for m in &mut e2.memories {
                // The swap 0 <-> 1 on both levels.
                m.0[0] = 1 - m.0[0];
                m.0[1] = 1 - m.0[1];
            }
            e2
        })
        .collect();

    let fallback = PolicyParams::uniform(&structure);
    let refs: Vec<&_> = episodes.iter().collect();
    let refs2: Vec<&_> = relabeled.iter().collect();
    let a = ml_update(&structure, &refs, 0.5, &fallback).unwrap();
    let b = ml_update(&structure, &refs2, 0.5, &fallback).unwrap();

    let ys = vec![0usize, 1, 0, 1];
    let law_a = action_sequence_law(&a, &ys);
    let law_b = action_sequence_law(&b, &ys);
    assert_eq!(law_a.len(), law_b.len());
    for (xs, &p) in &law_a {
        assert_abs_diff_eq!(law_b[xs], p, epsilon = 1e-12);
    }
}

#[test]
fn document_round_trip_is_bit_exact() {
    let structure = HhmmStructure::new(vec![2, 3], 4, 2).unwrap();
    let mut rng = episode_rng(47, StreamSpace::Rollout, 0, 0);
    let policy = random_policy_params(&mut rng, &structure);
    let back = deserialize_policy(&serialize_policy(&policy)).unwrap();
    assert_eq!(back, policy);

    let world = random_world(&mut rng, 3, 4, 2, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
    let episode = sample_episode(&world, &policy, 5, &mut rng).unwrap();
    // Bit-identical parameters give bit-identical likelihoods.
    assert_eq!(
        back.log_prob(&episode).unwrap(),
        policy.log_prob(&episode).unwrap()
    );
}

#[test]
fn documents_name_the_broken_table() {
    use cepomdp_core::policy::PolicyDocError;

    let structure = HhmmStructure::new(vec![2, 2], 2, 2).unwrap();
    let mut rng = episode_rng(48, StreamSpace::Rollout, 0, 0);
    let policy = random_policy_params(&mut rng, &structure);
    let mut doc: serde_json::Value =
        serde_json::from_str(&serialize_policy(&policy)).unwrap();

    doc["level_tables"][0][1][0] = serde_json::Value::from(0.9);
    doc["level_tables"][0][1][1] = serde_json::Value::from(0.9);
    match deserialize_policy(&doc.to_string()) {
        Err(PolicyDocError::Table { table, source }) => {
            assert_eq!(table, "level 2");
            assert!(source.to_string().contains("row 1"), "{source}");
        }
        other => panic!("expected a table error, got {other:?}"),
    }

    let mut doc: serde_json::Value =
        serde_json::from_str(&serialize_policy(&policy)).unwrap();
    doc["schema"] = serde_json::Value::from("hhmm-policy-v0");
    assert!(matches!(
        deserialize_policy(&doc.to_string()),
        Err(PolicyDocError::Schema { .. })
    ));
}

#[test]
fn malformed_episodes_are_named_precisely() {
    let structure = HhmmStructure::new(vec![2], 2, 2).unwrap();
    let policy = PolicyParams::uniform(&structure);

    let ragged = bare_episode(vec![0, 1], vec![0], vec![vec![0], vec![1]], 0.0);
    assert_eq!(
        policy.log_prob(&ragged).unwrap_err(),
        EpisodeShapeError::RaggedEpisode {
            actions: 2,
            observations: 1
        }
    );

    let wide = bare_episode(vec![0], vec![0], vec![vec![0, 1]], 0.0);
    assert_eq!(
        policy.log_prob(&wide).unwrap_err(),
        EpisodeShapeError::WrongLevels {
            step: 1,
            want: 1,
            got: 2
        }
    );

    let out = bare_episode(vec![5], vec![0], vec![vec![0]], 0.0);
    assert_eq!(
        policy.log_prob(&out).unwrap_err(),
        EpisodeShapeError::SymbolOutOfRange {
            kind: "action",
            step: 1,
            symbol: 5,
            card: 2
        }
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_law_normalizes(
        cards in prop::collection::vec(1usize..=3, 1..=3),
        actions in 1usize..=3,
        observations in 1usize..=3,
        seed in 0u64..1000,
        use_prev_memory: bool,
        prev_obs_pick in prop::option::of(0usize..3),
    ) {
        let structure = HhmmStructure::new(cards.clone(), actions, observations).unwrap();
        let mut rng = episode_rng(seed, StreamSpace::Rollout, 0, 0);
        let policy = random_policy_params(&mut rng, &structure);
        let memories = all_memories(&cards);
        let prev_memory = use_prev_memory.then(|| memories[seed as usize % memories.len()].clone());
        let prev_obs = prev_obs_pick.map(|y| y % observations);
        let mut total = 0.0;
        for m in &memories {
            for x in 0..actions {
                total += policy.step_prob(prev_memory.as_ref(), prev_obs, m, x);
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}
