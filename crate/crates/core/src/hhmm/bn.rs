//! Column interpreter: the run flattened into one (states, booleans,
//! output) column per emitted symbol.
//!
//! A settled column holds a non-ending state per level and the symbol the
//! bottom level produced. Moving to the next column resolves the boundary
//! bottom-up: level 2 always transits; a level whose child's run just
//! ended transits too, and its boolean records whether its own run ended;
//! a level whose child is still running copies its state and its boolean
//! is FALSE without any draw. Top-down afterwards: levels above the pivot
//! (the lowest level that transited without ending) copy, the pivot takes
//! its transited state, everything below is freshly produced, and the new
//! bottom state emits the column's output.
//!
//! Per boundary the draws run: transits bottom-up, then productions
//! top-down. That is the exact order of the call/return interpreter, so
//! the two produce identical runs from identical generators.

use rand::RngCore;
use thiserror::Error;

use super::{HhmmSpec, SampledSequence};
use crate::dist::sample_index;

/// Boolean control cell of a column boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoolCell {
    /// Not resolved; only appears on the first column, which has no
    /// boundary to its left.
    Unspecified,
    /// The level's run continued across the boundary.
    False,
    /// The level's run ended at the boundary.
    True,
}

/// One settled column: states per level (bottom first), the boolean cells
/// of the boundary that produced it, and the emitted symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BnColumn {
    /// State of depth d at index d - 2.
    pub states: Vec<usize>,
    /// Boundary boolean of depth d at index d - 2.
    pub booleans: Vec<BoolCell>,
    pub output: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BnStep {
    Column(BnColumn),
    /// The root ended; the sequence is complete.
    Ended,
}

#[derive(Debug, Error, PartialEq)]
pub enum BnError {
    #[error(
        "no rule covers the column: level {level} holds ending state {state}; \
         settled columns may only hold running states"
    )]
    EndedStateInColumn { level: usize, state: usize },
}

/// First column: root state from the initial law (an ending root is the
/// empty sequence), then a production cascade down to the output. All
/// booleans stay unspecified, there being no boundary on the left.
pub fn bn_start(spec: &HhmmSpec, rng: &mut dyn RngCore) -> BnStep {
    let n = spec.num_state_levels();
    let root_state = sample_index(spec.init(), rng);
    if spec.level_index(n - 1).is_ending(root_state) {
        return BnStep::Ended;
    }
    let mut states = vec![0; n];
    states[n - 1] = root_state;
    for k in (0..n - 1).rev() {
        states[k] = sample_index(spec.level_index(k + 1).production_row(states[k + 1]), rng);
    }
    let output = sample_index(spec.level_index(0).production_row(states[0]), rng);
    BnStep::Column(BnColumn {
        states,
        booleans: vec![BoolCell::Unspecified; n],
        output,
    })
}

/// Advance one boundary. Errors on columns that no rule covers, which
/// cannot arise from [`bn_start`] and [`bn_step`] on a validated model.
pub fn bn_step(spec: &HhmmSpec, column: &BnColumn, rng: &mut dyn RngCore) -> Result<BnStep, BnError> {
    let n = spec.num_state_levels();
    let mut booleans = vec![BoolCell::Unspecified; n];
    let mut transited: Vec<Option<usize>> = vec![None; n];

    // Bottom-up: the output border below level 2 always "ends", so level
    // 2 transits on every boundary. A TRUE propagates the transit upward;
    // a FALSE freezes everything above into copies.
    let mut child_ended = true;
    for k in 0..n {
        if !child_ended {
            booleans[k] = BoolCell::False;
            continue;
        }
        let level = spec.level_index(k);
        let state = column.states[k];
        if level.is_ending(state) {
            return Err(BnError::EndedStateInColumn {
                level: k + 2,
                state,
            });
        }
        let next = sample_index(level.transition_row(state), rng);
        transited[k] = Some(next);
        let ended = level.is_ending(next);
        booleans[k] = if ended { BoolCell::True } else { BoolCell::False };
        child_ended = ended;
    }

    if booleans[n - 1] == BoolCell::True {
        return Ok(BnStep::Ended);
    }

    // Top-down: copy above the pivot, transit at it, produce below it.
    let pivot = (0..n)
        .find(|&k| booleans[k] == BoolCell::False)
        .expect("a non-ended root implies a FALSE cell");
    let mut states = column.states.clone();
    states[pivot] = transited[pivot].expect("the pivot transited");
    for k in (0..pivot).rev() {
        states[k] = sample_index(spec.level_index(k + 1).production_row(states[k + 1]), rng);
    }
    let output = sample_index(spec.level_index(0).production_row(states[0]), rng);
    Ok(BnStep::Column(BnColumn {
        states,
        booleans,
        output,
    }))
}

/// Drive the column interpreter for a full run. Stops after `max_columns`
/// outputs and flags truncation if the root has not ended by then.
pub fn bn_sample(spec: &HhmmSpec, rng: &mut dyn RngCore, max_columns: usize) -> SampledSequence {
    let mut outputs = Vec::new();
    let mut column = match bn_start(spec, rng) {
        BnStep::Ended => {
            return SampledSequence {
                outputs,
                truncated: false,
            }
        }
        BnStep::Column(c) => c,
    };
    loop {
        outputs.push(column.output);
        if outputs.len() >= max_columns {
            return SampledSequence {
                outputs,
                truncated: true,
            };
        }
        match bn_step(spec, &column, rng).expect("settled columns stay covered") {
            BnStep::Ended => {
                return SampledSequence {
                    outputs,
                    truncated: false,
                }
            }
            BnStep::Column(c) => column = c,
        }
    }
}

/// One weighted branch of a boundary resolution.
enum Branch {
    /// Every level ended; the sequence terminates.
    End(f64),
    /// Some level survived: the fully resolved next column.
    Next(Vec<usize>, usize, f64),
}

/// All weighted outcomes of one boundary from `states`, by direct
/// expansion of the rules: transits bottom-up until a level survives,
/// then productions underneath the pivot and the emitted output.
fn boundary_branches(spec: &HhmmSpec, states: &[usize]) -> Vec<Branch> {
    let n = spec.num_state_levels();
    let mut branches = Vec::new();
    // Walk the transit cascade: levels 0..k ended, level k transits.
    let mut cascade = vec![1.0_f64]; // cascade[k]: weight of "levels below k all ended"
    for k in 0..n {
        let level = spec.level_index(k);
        let weight_below = *cascade.last().expect("nonempty");
        if weight_below == 0.0 {
            break;
        }
        let mut ended_mass = 0.0;
        for (next, &p) in level.transition_row(states[k]).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if level.is_ending(next) {
                ended_mass += p;
                continue;
            }
            // Pivot at k: levels above copy, below get produced.
            let mut new_states = states.to_vec();
            new_states[k] = next;
            produce_below(spec, k, new_states, weight_below * p, &mut branches);
        }
        if k == n - 1 {
            if ended_mass > 0.0 {
                branches.push(Branch::End(weight_below * ended_mass));
            }
        } else {
            cascade.push(weight_below * ended_mass);
        }
    }
    branches
}

/// Enumerate the production cascade under a pivot at level `k` and the
/// output draw, appending fully resolved branches.
fn produce_below(
    spec: &HhmmSpec,
    k: usize,
    states: Vec<usize>,
    weight: f64,
    branches: &mut Vec<Branch>,
) {
    if k == 0 {
        for (symbol, &p) in spec.level_index(0).production_row(states[0]).iter().enumerate() {
            if p > 0.0 {
                branches.push(Branch::Next(states.clone(), symbol, weight * p));
            }
        }
        return;
    }
    let row = spec.level_index(k).production_row(states[k]).to_vec();
    for (child, p) in row.into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut next = states.clone();
        next[k - 1] = child;
        produce_below(spec, k - 1, next, weight * p, branches);
    }
}

/// Exact law over output sequences computed by expanding the column
/// rules layer by layer, one layer per emitted symbol. Independent of
/// [`super::enumerate_sequences`] in both recursion shape and state.
pub fn bn_enumerate_sequences(
    spec: &HhmmSpec,
    max_len: usize,
) -> Result<super::SequenceDistribution, super::HhmmError> {
    use std::collections::BTreeMap;
    spec.sequence_budget(max_len)?;

    let n = spec.num_state_levels();
    let mut probabilities: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut overflow = 0.0;

    // Expand the first column: init, production cascade, output.
    let mut layer: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
    for (root_state, &p) in spec.init().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        if spec.level_index(n - 1).is_ending(root_state) {
            *probabilities.entry(Vec::new()).or_insert(0.0) += p;
            continue;
        }
        let mut states = vec![0; n];
        states[n - 1] = root_state;
        let mut first = Vec::new();
        produce_below(spec, n - 1, states, p, &mut first);
        for branch in first {
            match branch {
                Branch::End(_) => unreachable!("production cascades cannot end"),
                Branch::Next(states, output, weight) => {
                    *layer.entry((states, vec![output])).or_insert(0.0) += weight;
                }
            }
        }
    }

    // One layer per output symbol.
    while !layer.is_empty() {
        let mut next_layer: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
        for ((states, prefix), weight) in layer {
            let at_cap = prefix.len() >= max_len;
            for branch in boundary_branches(spec, &states) {
                match branch {
                    Branch::End(p) => {
                        *probabilities.entry(prefix.clone()).or_insert(0.0) += weight * p;
                    }
                    Branch::Next(new_states, output, p) => {
                        if at_cap {
                            overflow += weight * p;
                        } else {
                            let mut seq = prefix.clone();
                            seq.push(output);
                            *next_layer.entry((new_states, seq)).or_insert(0.0) += weight * p;
                        }
                    }
                }
            }
        }
        layer = next_layer;
    }

    Ok(super::SequenceDistribution {
        probabilities,
        overflow,
    })
}
