//! Random instance generators, used by tests, demos and the solver checks.

use rand::{Rng, RngCore};

use super::{Evaluation, WorldModel};
use crate::dist::CondTable;
use crate::policy::{HhmmStructure, PolicyParams};

/// Shape of the randomly drawn terminal evaluation.
#[derive(Clone, Copy, Debug)]
pub enum RandomEval {
    /// V_T(x, z) with values uniform in [lo, hi].
    ActionState { lo: f64, hi: f64 },
    /// V_T(x, y, z) with values uniform in [lo, hi].
    Full { lo: f64, hi: f64 },
}

fn random_row(rng: &mut dyn RngCore, len: usize) -> Vec<f64> {
    // Entries bounded away from zero so every symbol stays reachable.
    let mut row: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = row.iter().sum();
    for v in &mut row {
        *v /= sum;
    }
    row
}

fn random_rows(rng: &mut dyn RngCore, rows: usize, cols: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        out.extend(random_row(rng, cols));
    }
    out
}

/// Random dense world with strictly positive laws.
pub fn random_world(
    rng: &mut dyn RngCore,
    num_states: usize,
    num_actions: usize,
    num_observations: usize,
    eval: RandomEval,
) -> WorldModel {
    let initial = random_row(rng, num_states);
    let transition = random_rows(rng, num_states * num_actions, num_states);
    let observation = random_rows(rng, num_states, num_observations);
    let evaluation = match eval {
        RandomEval::ActionState { lo, hi } => Evaluation::terminal_action_state(
            (0..num_actions * num_states)
                .map(|_| rng.random_range(lo..hi))
                .collect(),
            num_actions,
            num_states,
        )
        .expect("shape by construction"),
        RandomEval::Full { lo, hi } => Evaluation::terminal_full(
            (0..num_actions * num_observations * num_states)
                .map(|_| rng.random_range(lo..hi))
                .collect(),
            num_actions,
            num_observations,
            num_states,
        )
        .expect("shape by construction"),
    };
    WorldModel::new(
        num_states,
        num_actions,
        num_observations,
        initial,
        transition,
        observation,
        evaluation,
    )
    .expect("rows normalized by construction")
}

/// Random policy parameters with strictly positive rows.
pub fn random_policy_params(rng: &mut dyn RngCore, structure: &HhmmStructure) -> PolicyParams {
    let levels = structure.levels();
    let card = |l: usize| structure.level_cards[l - 1];
    let upper = |l: usize| if l < levels { card(l + 1) } else { 0 };
    let table = |rng: &mut dyn RngCore, ctx: &[usize], outcomes: usize| {
        let rows: usize = ctx.iter().map(|&c| c + 1).product();
        CondTable::from_rows(ctx, outcomes, random_rows(rng, rows, outcomes), 1e-9)
            .expect("rows normalized by construction")
    };
    let action_table = table(rng, &[card(1)], structure.num_actions);
    let bottom_table = table(rng, &[structure.num_observations, upper(1)], card(1));
    let level_tables = (2..=levels)
        .map(|l| table(rng, &[card(l - 1), upper(l)], card(l)))
        .collect();
    PolicyParams::from_tables(structure.clone(), action_table, bottom_table, level_tables)
}
