//! Exact finite-horizon solvers over a world file. Oversized instances
//! are refused with a nonzero exit rather than attempted.

use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::json;

use cepomdp_core::oracle::{
    brute_force_tree_search, mdp_dp, pomdp_belief_dp, DEFAULT_BELIEF_NODE_CAP, DEFAULT_TREE_CAP,
    DEFAULT_TREE_OP_CAP,
};
use cepomdp_core::pomdp::load_world;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Solver {
    /// State dynamic programming; treats the state as observed.
    State,
    /// Dynamic programming over unnormalized beliefs.
    Belief,
    /// Brute-force search over observation-indexed decision trees.
    Tree,
}

pub fn run(world_path: &Path, horizon: usize, solver: Solver) -> Result<()> {
    let world = load_world(world_path)
        .with_context(|| format!("loading world {}", world_path.display()))?;
    let (value, first_action) = match solver {
        Solver::State => {
            let solution = mdp_dp(&world, horizon)?;
            (solution.value, solution.first_action)
        }
        Solver::Belief => {
            let solution = pomdp_belief_dp(&world, horizon, DEFAULT_BELIEF_NODE_CAP)?;
            (solution.value, solution.first_action)
        }
        Solver::Tree => {
            let solution =
                brute_force_tree_search(&world, horizon, DEFAULT_TREE_CAP, DEFAULT_TREE_OP_CAP)?;
            (solution.value, solution.tree.first_action())
        }
    };
    println!(
        "{}",
        json!({
            "solver": format!("{solver:?}").to_lowercase(),
            "horizon": horizon,
            "value": value,
            "first_action": first_action,
        })
    );
    Ok(())
}
