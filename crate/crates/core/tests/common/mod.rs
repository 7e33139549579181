//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use cepomdp_core::policy::MemoryVector;
use cepomdp_core::pomdp::{Episode, Policy};
use cepomdp_core::{deserialize_policy, serialize_policy, PolicyParams};
use rand::Rng;
use rand::RngCore;
use serde_json::Value;
use std::collections::BTreeMap;

/// Every memory vector of a shape, odometer order, last level fastest.
pub fn all_memories(shape: &[usize]) -> Vec<MemoryVector> {
    let mut out = vec![vec![0usize; shape.len()]];
    for (level, &card) in shape.iter().enumerate() {
        let prev = std::mem::take(&mut out);
        for m in prev {
            for v in 0..card {
                let mut next = m.clone();
                next[level] = v;
                out.push(next);
            }
        }
    }
    out.into_iter().map(MemoryVector).collect()
}

/// Law of the action sequence given a fixed observation sequence, hidden
/// memory summed out. Brute force, usable only for tiny shapes.
pub fn action_sequence_law<P: Policy>(policy: &P, observations: &[usize]) -> BTreeMap<Vec<usize>, f64> {
    let memories = all_memories(policy.memory_shape());
    // layer: (memory at the previous step, actions so far) -> weight
    let mut layer: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
    layer.insert((Vec::new(), Vec::new()), 1.0);
    for t in 1..=observations.len() {
        let mut next: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
        for ((prev_m, xs), weight) in layer {
            let prev_memory = (t >= 2).then(|| MemoryVector(prev_m.clone()));
            let prev_observation = (t >= 2).then(|| observations[t - 2]);
            for memory in &memories {
                for action in 0..policy.num_actions() {
                    let p = policy.step_prob(
                        prev_memory.as_ref(),
                        prev_observation,
                        memory,
                        action,
                    );
                    if p == 0.0 {
                        continue;
                    }
                    let mut xs2 = xs.clone();
                    xs2.push(action);
                    *next.entry((memory.0.clone(), xs2)).or_insert(0.0) += weight * p;
                }
            }
        }
        layer = next;
    }
    let mut law = BTreeMap::new();
    for ((_, xs), weight) in layer {
        *law.entry(xs).or_insert(0.0) += weight;
    }
    law
}

/// An episode record built by hand; states stay unrecorded.
pub fn bare_episode(
    actions: Vec<usize>,
    observations: Vec<usize>,
    memories: Vec<Vec<usize>>,
    score: f64,
) -> Episode {
    Episode {
        actions,
        observations,
        states: None,
        memories: memories.into_iter().map(MemoryVector).collect(),
        score,
    }
}

/// Move probability `step` between two entries of one random row, going
/// through the document form so the result passes the loader's checks.
pub fn perturb_policy(params: &PolicyParams, rng: &mut dyn RngCore, step: f64) -> PolicyParams {
    let mut doc: Value = serde_json::from_str(&serialize_policy(params)).unwrap();
    loop {
        let tables = ["action_table", "bottom_table", "level_tables"];
        let pick = tables[rng.random_range(0..tables.len())];
        let table: &mut Value = match pick {
            "level_tables" => {
                let list = doc["level_tables"].as_array_mut().unwrap();
                if list.is_empty() {
                    continue;
                }
                let i = rng.random_range(0..list.len());
                &mut list[i]
            }
            name => &mut doc[name],
        };
        let rows = table.as_array_mut().unwrap();
        let which = rng.random_range(0..rows.len());
        let row = rows[which].as_array_mut().unwrap();
        if row.len() < 2 {
            continue;
        }
        let from = rng.random_range(0..row.len());
        let to = loop {
            let j = rng.random_range(0..row.len());
            if j != from {
                break j;
            }
        };
        let a = row[from].as_f64().unwrap();
        let b = row[to].as_f64().unwrap();
        if a < step || a - step < 0.0 {
            continue;
        }
        row[from] = Value::from(a - step);
        row[to] = Value::from(b + step);
        break;
    }
    deserialize_policy(&doc.to_string()).expect("a shifted row still normalizes")
}
