//! Call/return interpreter: one recursive descent per produced child.

use std::collections::{BTreeMap, HashMap};

use rand::RngCore;

use super::{HhmmError, HhmmSpec, SampledSequence, SequenceDistribution};
use crate::dist::sample_index;

/// Run the generator until the root ends or `max_events` random draws
/// have been spent (the initial draw included).
pub fn sample_recursive(
    spec: &HhmmSpec,
    rng: &mut dyn RngCore,
    max_events: u64,
) -> SampledSequence {
    let mut outputs = Vec::new();
    let mut events = max_events;
    if !spend(&mut events) {
        return SampledSequence {
            outputs,
            truncated: true,
        };
    }
    let root = spec.depth();
    let start = sample_index(spec.init(), rng);
    if spec.level(root).is_ending(start) {
        return SampledSequence {
            outputs,
            truncated: false,
        };
    }
    let truncated = run_level(spec, root, start, rng, &mut events, &mut outputs).is_err();
    SampledSequence { outputs, truncated }
}

struct OutOfEvents;

fn spend(events: &mut u64) -> bool {
    if *events == 0 {
        return false;
    }
    *events -= 1;
    true
}

/// Run level `depth` from the non-ending state `start` until it ends.
fn run_level(
    spec: &HhmmSpec,
    depth: usize,
    start: usize,
    rng: &mut dyn RngCore,
    events: &mut u64,
    outputs: &mut Vec<usize>,
) -> Result<(), OutOfEvents> {
    let level = spec.level(depth);
    let mut state = start;
    loop {
        debug_assert!(!level.is_ending(state));
        if !spend(events) {
            return Err(OutOfEvents);
        }
        let child = sample_index(level.production_row(state), rng);
        if depth == 2 {
            outputs.push(child);
        } else {
            // Producing into an ending child is ruled out at validation.
            run_level(spec, depth - 1, child, rng, events, outputs)?;
        }
        if !spend(events) {
            return Err(OutOfEvents);
        }
        state = sample_index(level.transition_row(state), rng);
        if level.is_ending(state) {
            return Ok(());
        }
    }
}

/// Law over complete runs of one sub-process: sequences it can emit while
/// ending within the budget, plus the mass of everything longer.
#[derive(Clone, Debug)]
struct RunDist {
    completed: BTreeMap<Vec<usize>, f64>,
    overflow: f64,
}

/// Exact law over whole output sequences of length <= `max_len`, computed
/// from the call/return semantics. The leftover mass (longer sequences
/// and non-terminating runs) lands in `overflow`.
pub fn enumerate_sequences(
    spec: &HhmmSpec,
    max_len: usize,
) -> Result<SequenceDistribution, HhmmError> {
    spec.sequence_budget(max_len)?;
    let mut memo: HashMap<(usize, usize, usize), RunDist> = HashMap::new();
    let mut probabilities: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut overflow = 0.0;
    let root = spec.depth();
    for (q, &p) in spec.init().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        if spec.level(root).is_ending(q) {
            *probabilities.entry(Vec::new()).or_insert(0.0) += p;
            continue;
        }
        let dist = run_dist(spec, root, q, max_len, &mut memo);
        for (seq, &mass) in &dist.completed {
            *probabilities.entry(seq.clone()).or_insert(0.0) += p * mass;
        }
        overflow += p * dist.overflow;
    }
    Ok(SequenceDistribution {
        probabilities,
        overflow,
    })
}

/// Law of the run of (depth, state) under an output budget. The state is
/// non-ending. Memoized: budgets only shrink, so the recursion is finite.
fn run_dist(
    spec: &HhmmSpec,
    depth: usize,
    state: usize,
    budget: usize,
    memo: &mut HashMap<(usize, usize, usize), RunDist>,
) -> RunDist {
    if let Some(hit) = memo.get(&(depth, state, budget)) {
        return hit.clone();
    }
    let level = spec.level(depth);
    debug_assert!(!level.is_ending(state));

    // Step 1: the production and the complete child run.
    let mut child_runs: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut overflow = 0.0;
    if depth == 2 {
        if budget == 0 {
            overflow = 1.0;
        } else {
            for (symbol, &mass) in level.production_row(state).iter().enumerate() {
                if mass > 0.0 {
                    child_runs.insert(vec![symbol], mass);
                }
            }
        }
    } else {
        for (child, &mass) in level.production_row(state).iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let sub = run_dist(spec, depth - 1, child, budget, memo);
            for (seq, &m) in &sub.completed {
                *child_runs.entry(seq.clone()).or_insert(0.0) += mass * m;
            }
            overflow += mass * sub.overflow;
        }
    }

    // Step 2: the transit, then the rest of this level's run.
    let mut completed: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (prefix, &p_prefix) in &child_runs {
        // Child runs emit at least one symbol, so the budget shrinks.
        debug_assert!(!prefix.is_empty());
        let rest_budget = budget - prefix.len();
        for (next, &p_next) in level.transition_row(state).iter().enumerate() {
            if p_next == 0.0 {
                continue;
            }
            let weight = p_prefix * p_next;
            if level.is_ending(next) {
                *completed.entry(prefix.clone()).or_insert(0.0) += weight;
                continue;
            }
            let rest = run_dist(spec, depth, next, rest_budget, memo);
            for (suffix, &m) in &rest.completed {
                let mut seq = prefix.clone();
                seq.extend_from_slice(suffix);
                *completed.entry(seq).or_insert(0.0) += weight * m;
            }
            overflow += weight * rest.overflow;
        }
    }

    let dist = RunDist {
        completed,
        overflow,
    };
    memo.insert((depth, state, budget), dist.clone());
    dist
}
