//! Stochastic policies with layered internal memory.
//!
//! A policy carries `levels` memory layers on top of the action layer.
//! Within a step the layers resolve top-down: the top layer moves first,
//! each layer conditions on the layer below at the previous step and the
//! layer above at the current step, the bottom layer conditions on the
//! previous observation instead, and the action depends only on the bottom
//! layer:
//!
//! ```text
//! m^L_t ~ h^L(. | m^{L-1}_{t-1})
//! m^l_t ~ h^l(. | m^{l-1}_{t-1}, m^{l+1}_t)      2 <= l < L
//! m^1_t ~ h^1(. | y_{t-1},      m^2_t)
//! x_t   ~ h^0(. | m^1_t)
//! ```
//!
//! With one level the policy is a reflex: nothing persists across steps and
//! the action law depends on the previous observation alone. With two
//! levels the top layer is a conventional hidden-chain memory.
//!
//! Conditioning on a quantity from step t-1 uses the reserved before-start
//! slot at t = 1, so the first step needs no special casing anywhere.

mod doc;
mod update;

pub use doc::{deserialize_policy, serialize_policy, PolicyDocError, POLICY_SCHEMA};
pub use update::{ml_update, MlError};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::CondTable;
use crate::pomdp::{Episode, Policy};

/// Memory symbols for one step, bottom level first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MemoryVector(pub Vec<usize>);

impl MemoryVector {
    pub fn levels(&self) -> usize {
        self.0.len()
    }

    /// Symbol of 1-based level `level`.
    pub fn level(&self, level: usize) -> usize {
        self.0[level - 1]
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("a policy needs at least one memory level")]
    NoLevels,
    #[error("every cardinality must be at least 1")]
    EmptyCardinality,
}

/// Shape of a layered policy: memory cardinalities (bottom first) plus the
/// action and observation alphabets it is wired to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HhmmStructure {
    pub level_cards: Vec<usize>,
    pub num_actions: usize,
    pub num_observations: usize,
}

impl HhmmStructure {
    pub fn new(
        level_cards: Vec<usize>,
        num_actions: usize,
        num_observations: usize,
    ) -> Result<Self, StructureError> {
        if level_cards.is_empty() {
            return Err(StructureError::NoLevels);
        }
        if num_actions == 0 || num_observations == 0 || level_cards.iter().any(|&c| c == 0) {
            return Err(StructureError::EmptyCardinality);
        }
        Ok(HhmmStructure {
            level_cards,
            num_actions,
            num_observations,
        })
    }

    pub fn levels(&self) -> usize {
        self.level_cards.len()
    }

    /// Number of free parameters: per table, (outcomes - 1) times the
    /// product of the real conditioning cardinalities. Reserved before-start
    /// slots are storage, not parameters, and do not count.
    pub fn param_count(&self) -> u64 {
        let levels = self.levels();
        let card = |l: usize| self.level_cards[l - 1] as u64;
        // Upper conditioning of level l: the level above at the same step,
        // or nothing for the top level.
        let upper = |l: usize| if l < levels { card(l + 1) } else { 1 };

        let mut count = (self.num_actions as u64 - 1) * card(1);
        count += (card(1) - 1) * self.num_observations as u64 * upper(1);
        for l in 2..=levels {
            count += (card(l) - 1) * card(l - 1) * upper(l);
        }
        count
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EpisodeShapeError {
    #[error("episode records {got} memory vectors for {want} steps")]
    MissingMemories { want: usize, got: usize },
    #[error("memory vector at step {step} has {got} levels, expected {want}")]
    WrongLevels { step: usize, want: usize, got: usize },
    #[error("{kind} symbol {symbol} at step {step} is out of range {card}")]
    SymbolOutOfRange {
        kind: &'static str,
        step: usize,
        symbol: usize,
        card: usize,
    },
    #[error("episode has {actions} actions but {observations} observations")]
    RaggedEpisode { actions: usize, observations: usize },
}

/// Full parameter set of a layered policy. Rows stay normalized; the only
/// ways to build one are the uniform initializer, the maximum-likelihood
/// refit, and the validated document loader.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams {
    structure: HhmmStructure,
    /// h^0: action law, conditioned on the bottom memory level.
    action_table: CondTable,
    /// h^1: bottom level, conditioned on (previous observation, level 2).
    bottom_table: CondTable,
    /// h^l for l = 2..=levels, conditioned on (level l-1 at the previous
    /// step, level l+1 at the current step). Index 0 holds level 2.
    level_tables: Vec<CondTable>,
}

impl PolicyParams {
    /// Flat policy: every row uniform.
    pub fn uniform(structure: &HhmmStructure) -> PolicyParams {
        let levels = structure.levels();
        let card = |l: usize| structure.level_cards[l - 1];
        let upper = |l: usize| if l < levels { card(l + 1) } else { 0 };

        let action_table = CondTable::uniform(&[card(1)], structure.num_actions);
        let bottom_table =
            CondTable::uniform(&[structure.num_observations, upper(1)], card(1));
        let level_tables = (2..=levels)
            .map(|l| CondTable::uniform(&[card(l - 1), upper(l)], card(l)))
            .collect();
        PolicyParams {
            structure: structure.clone(),
            action_table,
            bottom_table,
            level_tables,
        }
    }

    pub(crate) fn from_tables(
        structure: HhmmStructure,
        action_table: CondTable,
        bottom_table: CondTable,
        level_tables: Vec<CondTable>,
    ) -> PolicyParams {
        PolicyParams {
            structure,
            action_table,
            bottom_table,
            level_tables,
        }
    }

    pub fn structure(&self) -> &HhmmStructure {
        &self.structure
    }

    pub fn action_table(&self) -> &CondTable {
        &self.action_table
    }

    pub fn bottom_table(&self) -> &CondTable {
        &self.bottom_table
    }

    /// Table of 1-based level `l >= 2`.
    pub fn level_table(&self, l: usize) -> &CondTable {
        &self.level_tables[l - 2]
    }

    pub fn level_tables(&self) -> &[CondTable] {
        &self.level_tables
    }

    /// Draw (m_t, x_t); `None` conditioning selects the before-start slots.
    pub fn sample_step(
        &self,
        prev_memory: Option<&MemoryVector>,
        prev_observation: Option<usize>,
        rng: &mut dyn RngCore,
    ) -> (MemoryVector, usize) {
        let levels = self.structure.levels();
        let prev = |l: usize| prev_memory.map(|m| m.0[l - 1]);
        let mut memory = vec![0usize; levels];
        // Top level first, then down; each lower level sees the fresh symbol
        // above it.
        for l in (2..=levels).rev() {
            let above = if l < levels { Some(memory[l]) } else { None };
            memory[l - 1] = self.level_table(l).sample(&[prev(l - 1), above], rng);
        }
        let above = if levels >= 2 { Some(memory[1]) } else { None };
        memory[0] = self
            .bottom_table
            .sample(&[prev_observation, above], rng);
        let action = self.action_table.sample(&[Some(memory[0])], rng);
        (MemoryVector(memory), action)
    }

    /// Visit every factor of P(m_t, x_t | m_{t-1}, y_{t-1}), top-down.
    fn visit_step_factors(
        &self,
        prev_memory: Option<&MemoryVector>,
        prev_observation: Option<usize>,
        memory: &MemoryVector,
        action: usize,
        mut visit: impl FnMut(f64),
    ) {
        let levels = self.structure.levels();
        let prev = |l: usize| prev_memory.map(|m| m.0[l - 1]);
        for l in (2..=levels).rev() {
            let above = if l < levels { Some(memory.0[l]) } else { None };
            visit(self.level_table(l).prob(&[prev(l - 1), above], memory.0[l - 1]));
        }
        let above = if levels >= 2 { Some(memory.0[1]) } else { None };
        visit(self.bottom_table.prob(&[prev_observation, above], memory.0[0]));
        visit(self.action_table.prob(&[Some(memory.0[0])], action));
    }

    /// P(m_t, x_t | m_{t-1}, y_{t-1}).
    pub fn step_prob(
        &self,
        prev_memory: Option<&MemoryVector>,
        prev_observation: Option<usize>,
        memory: &MemoryVector,
        action: usize,
    ) -> f64 {
        let mut p = 1.0;
        self.visit_step_factors(prev_memory, prev_observation, memory, action, |f| p *= f);
        p
    }

    /// ln P(m_t, x_t | m_{t-1}, y_{t-1}); -inf where any factor vanishes.
    pub fn step_log_prob(
        &self,
        prev_memory: Option<&MemoryVector>,
        prev_observation: Option<usize>,
        memory: &MemoryVector,
        action: usize,
    ) -> f64 {
        let mut lp = 0.0;
        self.visit_step_factors(prev_memory, prev_observation, memory, action, |f| {
            lp += f.ln();
        });
        lp
    }

    /// Check an episode's record against this structure.
    pub fn check_episode(&self, episode: &Episode) -> Result<(), EpisodeShapeError> {
        check_episode_shape(&self.structure, episode)
    }

    /// Log-likelihood of the episode's (memory, action) record given its
    /// observation sequence.
    pub fn log_prob(&self, episode: &Episode) -> Result<f64, EpisodeShapeError> {
        self.check_episode(episode)?;
        let mut lp = 0.0;
        for t in 1..=episode.actions.len() {
            let prev_memory = if t >= 2 {
                Some(&episode.memories[t - 2])
            } else {
                None
            };
            let prev_observation = if t >= 2 {
                Some(episode.observations[t - 2])
            } else {
                None
            };
            lp += self.step_log_prob(
                prev_memory,
                prev_observation,
                &episode.memories[t - 1],
                episode.actions[t - 1],
            );
        }
        Ok(lp)
    }
}

/// Check an episode's symbol record against a structure.
pub(crate) fn check_episode_shape(
    structure: &HhmmStructure,
    episode: &Episode,
) -> Result<(), EpisodeShapeError> {
    let steps = episode.actions.len();
    if episode.observations.len() != steps {
        return Err(EpisodeShapeError::RaggedEpisode {
            actions: steps,
            observations: episode.observations.len(),
        });
    }
    if episode.memories.len() != steps {
        return Err(EpisodeShapeError::MissingMemories {
            want: steps,
            got: episode.memories.len(),
        });
    }
    let levels = structure.levels();
    for t in 1..=steps {
        let m = &episode.memories[t - 1];
        if m.levels() != levels {
            return Err(EpisodeShapeError::WrongLevels {
                step: t,
                want: levels,
                got: m.levels(),
            });
        }
        for (l, &sym) in m.0.iter().enumerate() {
            let card = structure.level_cards[l];
            if sym >= card {
                return Err(EpisodeShapeError::SymbolOutOfRange {
                    kind: "memory",
                    step: t,
                    symbol: sym,
                    card,
                });
            }
        }
        let x = episode.actions[t - 1];
        if x >= structure.num_actions {
            return Err(EpisodeShapeError::SymbolOutOfRange {
                kind: "action",
                step: t,
                symbol: x,
                card: structure.num_actions,
            });
        }
        let y = episode.observations[t - 1];
        if y >= structure.num_observations {
            return Err(EpisodeShapeError::SymbolOutOfRange {
                kind: "observation",
                step: t,
                symbol: y,
                card: structure.num_observations,
            });
        }
    }
    Ok(())
}

impl Policy for PolicyParams {
    fn num_actions(&self) -> usize {
        self.structure.num_actions
    }

    fn num_observations(&self) -> usize {
        self.structure.num_observations
    }

    fn memory_shape(&self) -> &[usize] {
        &self.structure.level_cards
    }

    fn sample_step(
        &self,
        prev_memory: Option<&MemoryVector>,
        prev_observation: Option<usize>,
        rng: &mut dyn RngCore,
    ) -> (MemoryVector, usize) {
        PolicyParams::sample_step(self, prev_memory, prev_observation, rng)
    }

    fn step_prob(
        &self,
        prev_memory: Option<&MemoryVector>,
        prev_observation: Option<usize>,
        memory: &MemoryVector,
        action: usize,
    ) -> f64 {
        PolicyParams::step_prob(self, prev_memory, prev_observation, memory, action)
    }
}
