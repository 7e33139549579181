//! Uncontrolled layered generator with call/return semantics.
//!
//! A model of depth Δ stacks Δ - 1 state levels above an output alphabet.
//! Each level d holds states `Q_d`, an ending subset, a production law
//! (state of level d → start state one level below, or an output symbol
//! when d = 2) and a transit law (state → next state on the same level).
//! A run of level d loops: produce a child, wait for the child's run to
//! end, transit; the run ends when the transit lands in the ending set.
//! The root starts from a dedicated initial law and the whole sequence is
//! what level 2 pushes into the output alphabet.
//!
//! Two interpreters implement these semantics:
//!
//! * [`sample_recursive`] / [`enumerate_sequences`]: the call/return form,
//!   one recursive descent per produced child.
//! * [`bn_step`] / [`bn_enumerate_sequences`]: the flattened column form.
//!   A column holds one state cell per level plus boolean cells that
//!   record which levels ended at the boundary; local rules decide per
//!   level whether the cell copies, transits, or is freshly produced.
//!
//! The two must define the same law over output sequences; the test
//! suites compare them exactly.
//!
//! One structural restriction keeps every reachable column covered by the
//! local rules: production laws must put zero mass on ending states of
//! the level below. A child born ended would end its run before emitting
//! anything, and no rule row describes such a column. Specs that could
//! reach that pattern are refused at construction instead of guessed at.
//! The root initial law is exempt: an initial ending state is the empty
//! sequence, which the interpreters represent directly.

mod bn;
mod file;
mod recursive;

pub use bn::{
    bn_enumerate_sequences, bn_sample, bn_start, bn_step, BnColumn, BnError, BnStep, BoolCell,
};
pub use file::{load_hhmm, parse_hhmm, save_hhmm, write_hhmm, HhmmFileError};
pub use recursive::{enumerate_sequences, sample_recursive};

use std::collections::BTreeMap;

use rand::RngCore;
use thiserror::Error;

/// Row sums must match 1 within this.
pub const HHMM_ROW_TOL: f64 = 1e-9;
/// Enumerators refuse when `outputs^max_len` passes this.
pub const DEFAULT_SEQUENCE_CAP: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum HhmmError {
    #[error("output alphabet must hold at least 1 symbol")]
    NoOutputs,
    #[error("a model needs at least one state level")]
    NoLevels,
    #[error("level {level} has no states")]
    EmptyLevel { level: usize },
    #[error("level {level} ending mask has {got} entries for {expected} states")]
    BadEndingMask {
        level: usize,
        expected: usize,
        got: usize,
    },
    #[error("level {level} {table} table has {got} entries, expected {expected}")]
    BadShape {
        level: usize,
        table: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("level {level} {table} row {state} sums to {sum}, need 1")]
    BadRow {
        level: usize,
        table: &'static str,
        state: usize,
        sum: f64,
    },
    #[error("level {level} {table} row {state} column {column} holds {value}")]
    NegativeEntry {
        level: usize,
        table: &'static str,
        state: usize,
        column: usize,
        value: f64,
    },
    #[error("level {level} {table} row {state} is for an ending state and must be all zero")]
    EndingRowNotZero {
        level: usize,
        table: &'static str,
        state: usize,
    },
    #[error(
        "level {level} production row {state} puts mass {mass} on ending child {child}; \
         a child born ended is unreachable for the column rules"
    )]
    ProductionIntoEndingChild {
        level: usize,
        state: usize,
        child: usize,
        mass: f64,
    },
    #[error("enumeration would cover about {estimated} sequences (cap {cap})")]
    EnumerationTooLarge { estimated: u64, cap: u64 },
}

/// One state level. Ending states carry no laws: their rows must be all
/// zero and are never sampled.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LevelSpec {
    pub(crate) states: usize,
    pub(crate) ending: Vec<bool>,
    /// states x child cardinality (outputs for level 2).
    pub(crate) production: Vec<f64>,
    /// states x states.
    pub(crate) transition: Vec<f64>,
}

impl LevelSpec {
    pub fn new(
        states: usize,
        ending: Vec<bool>,
        production: Vec<f64>,
        transition: Vec<f64>,
    ) -> LevelSpec {
        LevelSpec {
            states,
            ending,
            production,
            transition,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn is_ending(&self, state: usize) -> bool {
        self.ending[state]
    }

    pub fn non_ending_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states).filter(|&q| !self.ending[q])
    }

    fn child_card(&self) -> usize {
        self.production.len() / self.states
    }

    pub fn production_row(&self, state: usize) -> &[f64] {
        debug_assert!(!self.ending[state], "ending states produce nothing");
        let c = self.child_card();
        &self.production[state * c..(state + 1) * c]
    }

    pub fn transition_row(&self, state: usize) -> &[f64] {
        debug_assert!(!self.ending[state], "ending states never transit");
        &self.transition[state * self.states..(state + 1) * self.states]
    }
}

/// Full model: output alphabet size, one [`LevelSpec`] per depth 2..=Δ
/// (root last), and the root initial law.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HhmmSpec {
    outputs: usize,
    levels: Vec<LevelSpec>,
    init: Vec<f64>,
}

fn check_law_row(
    level: usize,
    table: &'static str,
    state: usize,
    row: &[f64],
) -> Result<(), HhmmError> {
    let mut sum = 0.0;
    for (column, &value) in row.iter().enumerate() {
        if value < 0.0 || !value.is_finite() {
            return Err(HhmmError::NegativeEntry {
                level,
                table,
                state,
                column,
                value,
            });
        }
        sum += value;
    }
    if (sum - 1.0).abs() > HHMM_ROW_TOL {
        return Err(HhmmError::BadRow {
            level,
            table,
            state,
            sum,
        });
    }
    Ok(())
}

impl HhmmSpec {
    pub fn new(
        outputs: usize,
        levels: Vec<LevelSpec>,
        init: Vec<f64>,
    ) -> Result<HhmmSpec, HhmmError> {
        if outputs == 0 {
            return Err(HhmmError::NoOutputs);
        }
        if levels.is_empty() {
            return Err(HhmmError::NoLevels);
        }
        for (k, lvl) in levels.iter().enumerate() {
            let depth = k + 2;
            if lvl.states == 0 {
                return Err(HhmmError::EmptyLevel { level: depth });
            }
            if lvl.ending.len() != lvl.states {
                return Err(HhmmError::BadEndingMask {
                    level: depth,
                    expected: lvl.states,
                    got: lvl.ending.len(),
                });
            }
            let child_card = if k == 0 { outputs } else { levels[k - 1].states };
            if lvl.production.len() != lvl.states * child_card {
                return Err(HhmmError::BadShape {
                    level: depth,
                    table: "production",
                    expected: lvl.states * child_card,
                    got: lvl.production.len(),
                });
            }
            if lvl.transition.len() != lvl.states * lvl.states {
                return Err(HhmmError::BadShape {
                    level: depth,
                    table: "transition",
                    expected: lvl.states * lvl.states,
                    got: lvl.transition.len(),
                });
            }
            for q in 0..lvl.states {
                let prod = &lvl.production[q * child_card..(q + 1) * child_card];
                let trans = &lvl.transition[q * lvl.states..(q + 1) * lvl.states];
                if lvl.ending[q] {
                    if prod.iter().any(|&v| v != 0.0) {
                        return Err(HhmmError::EndingRowNotZero {
                            level: depth,
                            table: "production",
                            state: q,
                        });
                    }
                    if trans.iter().any(|&v| v != 0.0) {
                        return Err(HhmmError::EndingRowNotZero {
                            level: depth,
                            table: "transition",
                            state: q,
                        });
                    }
                    continue;
                }
                check_law_row(depth, "production", q, prod)?;
                check_law_row(depth, "transition", q, trans)?;
                if k > 0 {
                    for (child, &mass) in prod.iter().enumerate() {
                        if mass > 0.0 && levels[k - 1].ending[child] {
                            return Err(HhmmError::ProductionIntoEndingChild {
                                level: depth,
                                state: q,
                                child,
                                mass,
                            });
                        }
                    }
                }
            }
        }
        let root = levels.len() - 1;
        if init.len() != levels[root].states {
            return Err(HhmmError::BadShape {
                level: root + 2,
                table: "init",
                expected: levels[root].states,
                got: init.len(),
            });
        }
        check_law_row(root + 2, "init", 0, &init)?;
        Ok(HhmmSpec {
            outputs,
            levels,
            init,
        })
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Depth Δ, counting the output alphabet as depth 1.
    pub fn depth(&self) -> usize {
        self.levels.len() + 1
    }

    /// Level of depth d, for d in 2..=Δ.
    pub fn level(&self, depth: usize) -> &LevelSpec {
        &self.levels[depth - 2]
    }

    pub(crate) fn level_index(&self, index: usize) -> &LevelSpec {
        &self.levels[index]
    }

    pub(crate) fn num_state_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    /// Cardinality one level below depth d: outputs for d = 2.
    pub fn child_card(&self, depth: usize) -> usize {
        if depth == 2 {
            self.outputs
        } else {
            self.level(depth - 1).states
        }
    }

    pub(crate) fn sequence_budget(&self, max_len: usize) -> Result<(), HhmmError> {
        let mut estimated: u64 = 1;
        for _ in 0..max_len {
            estimated = estimated.saturating_mul(self.outputs as u64);
        }
        if estimated > DEFAULT_SEQUENCE_CAP {
            return Err(HhmmError::EnumerationTooLarge {
                estimated,
                cap: DEFAULT_SEQUENCE_CAP,
            });
        }
        Ok(())
    }
}

/// One sampled output sequence. `truncated` marks runs stopped by the cap
/// rather than by the root ending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledSequence {
    pub outputs: Vec<usize>,
    pub truncated: bool,
}

/// Exact law over output sequences up to a length bound. `overflow` is
/// the mass of everything else: longer sequences and non-terminating
/// runs.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceDistribution {
    pub probabilities: BTreeMap<Vec<usize>, f64>,
    pub overflow: f64,
}

impl SequenceDistribution {
    pub fn prob(&self, sequence: &[usize]) -> f64 {
        self.probabilities.get(sequence).copied().unwrap_or(0.0)
    }

    /// Mass of sequences that terminate within the bound.
    pub fn terminated_mass(&self) -> f64 {
        self.probabilities.values().sum()
    }
}

/// Random valid spec for differential tests. Every level keeps at least
/// one non-ending state; the init law spans all root states, so empty
/// sequences occur whenever the root has ending states.
pub fn random_hhmm_spec(
    rng: &mut dyn RngCore,
    max_depth: usize,
    max_states: usize,
    max_outputs: usize,
) -> HhmmSpec {
    use rand::Rng;
    assert!(max_depth >= 2 && max_states >= 1 && max_outputs >= 1);
    let depth = rng.random_range(2..=max_depth);
    let outputs = rng.random_range(1..=max_outputs);

    let random_row = |rng: &mut dyn RngCore, allowed: &[usize], width: usize| -> Vec<f64> {
        let mut row = vec![0.0; width];
        let mut sum = 0.0;
        for &i in allowed {
            let v = rng.random_range(0.05..1.0);
            row[i] = v;
            sum += v;
        }
        for v in &mut row {
            *v /= sum;
        }
        row
    };

    let mut levels: Vec<LevelSpec> = Vec::new();
    for k in 0..depth - 1 {
        let states = rng.random_range(1..=max_states);
        let ending: Vec<bool> = loop {
            let mask: Vec<bool> = (0..states).map(|_| rng.random_bool(0.3)).collect();
            if mask.iter().any(|&e| !e) {
                break mask;
            }
        };
        let child_card = if k == 0 { outputs } else { levels[k - 1].states };
        let allowed_children: Vec<usize> = if k == 0 {
            (0..outputs).collect()
        } else {
            levels[k - 1].non_ending_states().collect()
        };
        let all_states: Vec<usize> = (0..states).collect();
        let mut production = Vec::with_capacity(states * child_card);
        let mut transition = Vec::with_capacity(states * states);
        for q in 0..states {
            if ending[q] {
                production.extend(std::iter::repeat_n(0.0, child_card));
                transition.extend(std::iter::repeat_n(0.0, states));
            } else {
                production.extend(random_row(rng, &allowed_children, child_card));
                transition.extend(random_row(rng, &all_states, states));
            }
        }
        levels.push(LevelSpec::new(states, ending, production, transition));
    }
    let root_states: Vec<usize> = (0..levels.last().unwrap().states).collect();
    let init = random_row(rng, &root_states, root_states.len());
    HhmmSpec::new(outputs, levels, init).expect("construction keeps every rule")
}

#[cfg(test)]
pub(crate) mod testspecs {
    use super::*;

    /// Depth 2, two working states and an ending state, two outputs.
    /// State 0 emits symbol 0 then moves to 1 or ends; state 1 emits
    /// symbol 1 then ends.
    pub fn small_flat() -> HhmmSpec {
        let level = LevelSpec::new(
            3,
            vec![false, false, true],
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        );
        HhmmSpec::new(2, vec![level], vec![1.0, 0.0, 0.0]).unwrap()
    }

    /// Depth 2 deterministic three-step chain: emits 0, 1, 0 and ends.
    pub fn flat_chain() -> HhmmSpec {
        let level = LevelSpec::new(
            4,
            vec![false, false, false, true],
            vec![
                1.0, 0.0, // q0 emits 0
                0.0, 1.0, // q1 emits 1
                1.0, 0.0, // q2 emits 0
                0.0, 0.0,
            ],
            vec![
                0.0, 1.0, 0.0, 0.0, // q0 -> q1
                0.0, 0.0, 1.0, 0.0, // q1 -> q2
                0.0, 0.0, 0.0, 1.0, // q2 -> end
                0.0, 0.0, 0.0, 0.0,
            ],
        );
        HhmmSpec::new(2, vec![level], vec![1.0, 0.0, 0.0, 0.0]).unwrap()
    }

    /// Depth 3 with a two-branch root: production picks the left child
    /// chain with weight 0.3 and the right with 0.7; each child chain
    /// emits a fixed pair of symbols and returns; the root then ends.
    pub fn two_branch() -> HhmmSpec {
        // Level 2: state 0 emits 0 then 1 then ends (via states 0,1);
        // state 2 emits 1 then 0 then ends (via states 2,3); state 4 ends.
        let level2 = LevelSpec::new(
            5,
            vec![false, false, false, false, true],
            vec![
                1.0, 0.0, // q0 emits 0
                0.0, 1.0, // q1 emits 1
                0.0, 1.0, // q2 emits 1
                1.0, 0.0, // q3 emits 0
                0.0, 0.0,
            ],
            vec![
                0.0, 1.0, 0.0, 0.0, 0.0, // q0 -> q1
                0.0, 0.0, 0.0, 0.0, 1.0, // q1 -> end
                0.0, 0.0, 0.0, 1.0, 0.0, // q2 -> q3
                0.0, 0.0, 0.0, 0.0, 1.0, // q3 -> end
                0.0, 0.0, 0.0, 0.0, 0.0,
            ],
        );
        // Root: one working state, produces child 0 or child 2, then ends.
        let root = LevelSpec::new(
            2,
            vec![false, true],
            vec![0.3, 0.0, 0.7, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        );
        HhmmSpec::new(2, vec![level2, root], vec![1.0, 0.0]).unwrap()
    }

    /// Depth 3, mildly stochastic everywhere; terminates fast.
    pub fn small_deep() -> HhmmSpec {
        let level2 = LevelSpec::new(
            3,
            vec![false, false, true],
            vec![0.8, 0.2, 0.3, 0.7, 0.0, 0.0],
            vec![0.0, 0.4, 0.6, 0.2, 0.0, 0.8, 0.0, 0.0, 0.0],
        );
        let root = LevelSpec::new(
            2,
            vec![false, true],
            vec![0.6, 0.4, 0.0, 0.0, 0.0, 0.0],
            vec![0.25, 0.75, 0.0, 0.0],
        );
        HhmmSpec::new(2, vec![level2, root], vec![1.0, 0.0]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_broken_specs() {
        // Row that does not sum to 1.
        let bad = HhmmSpec::new(
            2,
            vec![LevelSpec::new(
                2,
                vec![false, true],
                vec![0.5, 0.4, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
            )],
            vec![1.0, 0.0],
        );
        assert!(matches!(
            bad,
            Err(HhmmError::BadRow {
                level: 2,
                table: "production",
                state: 0,
                ..
            })
        ));
        // Nonzero row on an ending state.
        let bad = HhmmSpec::new(
            2,
            vec![LevelSpec::new(
                2,
                vec![false, true],
                vec![0.5, 0.5, 0.0, 0.0],
                vec![0.0, 1.0, 0.3, 0.7],
            )],
            vec![1.0, 0.0],
        );
        assert!(matches!(
            bad,
            Err(HhmmError::EndingRowNotZero {
                level: 2,
                table: "transition",
                state: 1
            })
        ));
        // Production mass on an ending child one level down.
        let level2 = LevelSpec::new(
            2,
            vec![false, true],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        );
        let root = LevelSpec::new(
            2,
            vec![false, true],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        );
        let bad = HhmmSpec::new(2, vec![level2, root], vec![1.0, 0.0]);
        assert!(matches!(
            bad,
            Err(HhmmError::ProductionIntoEndingChild {
                level: 3,
                state: 0,
                child: 1,
                ..
            })
        ));
        // Init shaped for the wrong root.
        let level = LevelSpec::new(
            2,
            vec![false, true],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
        );
        let bad = HhmmSpec::new(2, vec![level], vec![1.0]);
        assert!(matches!(
            bad,
            Err(HhmmError::BadShape { table: "init", .. })
        ));
    }

    #[test]
    fn random_specs_are_always_valid() {
        let mut rng = crate::rng::episode_rng(77, crate::rng::StreamSpace::Rollout, 0, 0);
        for _ in 0..200 {
            let spec = random_hhmm_spec(&mut rng, 3, 3, 3);
            assert!(spec.depth() >= 2 && spec.depth() <= 3);
            // Re-validating from parts must succeed.
            let rebuilt = HhmmSpec::new(
                spec.outputs(),
                spec.levels.clone(),
                spec.init().to_vec(),
            );
            assert!(rebuilt.is_ok());
        }
    }

    #[test]
    fn enumeration_budget_refuses_large_alphabets() {
        let spec = testspecs::small_flat();
        assert!(matches!(
            spec.sequence_budget(40),
            Err(HhmmError::EnumerationTooLarge { .. })
        ));
        assert!(spec.sequence_budget(6).is_ok());
    }
}
