//! Exact finite-horizon solvers.
//!
//! Three routes to the same optimum, deliberately independent of each other
//! and of the training loop, used as ground truth in tests:
//!
//! * [`mdp_dp`] — backward induction over states, for fully observable
//!   problems with a terminal evaluation.
//! * [`pomdp_belief_dp`] — backward induction over unnormalized beliefs.
//!   The recursion is linear in the belief, so beliefs are propagated
//!   without renormalizing; the observation likelihood stays folded in.
//! * [`brute_force_tree_search`] — total enumeration of decision trees
//!   (maps from observation history to action). Exponential and proud of
//!   it; guarded by explicit caps.
//!
//! All three are deterministic and take no randomness.

use thiserror::Error;

use crate::pomdp::{Evaluation, WorldModel};

/// Default ceiling on belief-tree nodes.
pub const DEFAULT_BELIEF_NODE_CAP: u64 = 1_000_000;
/// Default ceiling on enumerated decision trees.
pub const DEFAULT_TREE_CAP: u64 = 1_000_000;
/// Default ceiling on tree-search path work (trees times paths per tree).
pub const DEFAULT_TREE_OP_CAP: u64 = 200_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("this solver needs a terminal evaluation")]
    NonTerminalEvaluation,
    #[error("state dynamic programming needs an observation-free evaluation")]
    ObservationDependentEvaluation,
    #[error("belief tree would hold about {estimated_nodes} nodes (cap {cap})")]
    BeliefTreeTooLarge { estimated_nodes: u64, cap: u64 },
    #[error(
        "tree search would enumerate about {estimated_trees} trees / {estimated_ops} path \
         operations (caps {tree_cap} / {op_cap})"
    )]
    TreeSearchTooLarge {
        estimated_trees: u64,
        estimated_ops: u64,
        tree_cap: u64,
        op_cap: u64,
    },
}

/// Result of [`mdp_dp`]: optimal value, smallest optimal first action, and
/// the backward tables W_t(x, z) (index [t-1][x * states + z]).
#[derive(Clone, Debug)]
pub struct MdpSolution {
    pub value: f64,
    pub first_action: usize,
    pub w_tables: Vec<Vec<f64>>,
}

/// Backward induction for the fully observable case:
///
/// ```text
/// W_T(x, z) = V_T(x, z)
/// W_t(x, z) = max_x' sum_z' p(z' | z, x) W_{t+1}(x', z')
/// value     = max_x1 sum_z1 p(z1) W_1(x1, z1)
/// ```
///
/// Only terminal, observation-free evaluations qualify. Ties pick the
/// smaller action index.
pub fn mdp_dp(world: &WorldModel, horizon: usize) -> Result<MdpSolution, OracleError> {
    if horizon == 0 {
        return Err(OracleError::ZeroHorizon);
    }
    let terminal = terminal_xz(world)?;
    let states = world.num_states();
    let actions = world.num_actions();

    let mut w_tables = vec![Vec::new(); horizon];
    w_tables[horizon - 1] = terminal.to_vec();
    for t in (1..horizon).rev() {
        let next = std::mem::take(&mut w_tables[t]); // W_{t+1}
        let mut w = vec![0.0; actions * states];
        for z in 0..states {
            // The maximand depends on (z, x) only through the law of z'.
            for x in 0..actions {
                let law = world.state_law(Some((z, x)));
                let mut best = f64::NEG_INFINITY;
                for x_next in 0..actions {
                    let mut v = 0.0;
                    for (z_next, &p) in law.iter().enumerate() {
                        v += p * next[x_next * states + z_next];
                    }
                    if v > best {
                        best = v;
                    }
                }
                w[x * states + z] = best;
            }
        }
        w_tables[t] = next;
        w_tables[t - 1] = w;
    }

    let initial = world.state_law(None);
    let w1 = &w_tables[0];
    let mut value = f64::NEG_INFINITY;
    let mut first_action = 0;
    for x in 0..actions {
        let v: f64 = initial
            .iter()
            .enumerate()
            .map(|(z, &p)| p * w1[x * states + z])
            .sum();
        if v > value {
            value = v;
            first_action = x;
        }
    }
    Ok(MdpSolution {
        value,
        first_action,
        w_tables,
    })
}

fn terminal_xz(world: &WorldModel) -> Result<&[f64], OracleError> {
    match world.evaluation() {
        Evaluation::TerminalActionState { values, .. } => Ok(values),
        Evaluation::TerminalFull { .. } => Err(OracleError::ObservationDependentEvaluation),
        Evaluation::PerStep(_) => Err(OracleError::NonTerminalEvaluation),
    }
}

/// Result of [`pomdp_belief_dp`].
#[derive(Clone, Copy, Debug)]
pub struct BeliefSolution {
    pub value: f64,
    pub first_action: usize,
}

/// Backward induction over unnormalized beliefs:
///
/// ```text
/// W_T(b) = max_x sum_y sum_z b(z) p(y | z) V_T(x, y, z)
/// W_t(b) = max_x sum_y W_{t+1}(beta(. | x, y, b))
/// beta(z' | x, y, b) = sum_z b(z) p(y | z) p(z' | z, x)
/// ```
///
/// The root belief is the initial law; the returned first action is the
/// smallest maximizer of the root expression. The belief tree holds about
/// (actions x observations)^(horizon-1) leaves; anything above `max_nodes`
/// is refused.
pub fn pomdp_belief_dp(
    world: &WorldModel,
    horizon: usize,
    max_nodes: u64,
) -> Result<BeliefSolution, OracleError> {
    if horizon == 0 {
        return Err(OracleError::ZeroHorizon);
    }
    if !world.evaluation().is_terminal() {
        return Err(OracleError::NonTerminalEvaluation);
    }
    let branch = world.num_actions() as u64 * world.num_observations() as u64;
    let mut estimated_nodes: u64 = 1;
    for _ in 1..horizon {
        estimated_nodes = estimated_nodes.saturating_mul(branch);
    }
    if estimated_nodes > max_nodes {
        return Err(OracleError::BeliefTreeTooLarge {
            estimated_nodes,
            cap: max_nodes,
        });
    }

    let root: Vec<f64> = world.state_law(None).to_vec();
    let mut value = f64::NEG_INFINITY;
    let mut first_action = 0;
    for x in 0..world.num_actions() {
        let v = if horizon == 1 {
            terminal_belief_value_for_action(world, &root, x)
        } else {
            (0..world.num_observations())
                .map(|y| belief_w(world, horizon, 2, &advance_belief(world, &root, x, y)))
                .sum()
        };
        if v > value {
            value = v;
            first_action = x;
        }
    }
    Ok(BeliefSolution {
        value,
        first_action,
    })
}

/// W_t(b) for 2 <= t <= horizon.
fn belief_w(world: &WorldModel, horizon: usize, t: usize, belief: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for x in 0..world.num_actions() {
        let v = if t == horizon {
            terminal_belief_value_for_action(world, belief, x)
        } else {
            (0..world.num_observations())
                .map(|y| belief_w(world, horizon, t + 1, &advance_belief(world, belief, x, y)))
                .sum()
        };
        if v > best {
            best = v;
        }
    }
    best
}

/// sum_y sum_z b(z) p(y | z) V_T(x, y, z)
fn terminal_belief_value_for_action(world: &WorldModel, belief: &[f64], x: usize) -> f64 {
    let mut v = 0.0;
    for (z, &bz) in belief.iter().enumerate() {
        if bz == 0.0 {
            continue;
        }
        for (y, &py) in world.observation_law(z).iter().enumerate() {
            if py == 0.0 {
                continue;
            }
            v += bz
                * py
                * world
                    .evaluation()
                    .terminal_value(x, y, z)
                    .expect("checked terminal above");
        }
    }
    v
}

/// beta(z' | x, y, b): unnormalized posterior pushed through the dynamics.
fn advance_belief(world: &WorldModel, belief: &[f64], x: usize, y: usize) -> Vec<f64> {
    let states = world.num_states();
    let mut next = vec![0.0; states];
    for (z, &bz) in belief.iter().enumerate() {
        if bz == 0.0 {
            continue;
        }
        let py = world.observation_law(z)[y];
        if py == 0.0 {
            continue;
        }
        let w = bz * py;
        for (z_next, &p) in world.state_law(Some((z, x))).iter().enumerate() {
            next[z_next] += w * p;
        }
    }
    next
}

/// Deterministic map from observation history to action, one level per
/// step. `levels[t-1]` has observations^(t-1) slots; the slot of history
/// (y_1 .. y_{t-1}) is the radix encoding with y_1 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTree {
    pub horizon: usize,
    pub num_observations: usize,
    pub levels: Vec<Vec<usize>>,
}

impl DecisionTree {
    /// Action at step `t` (1-based) for an encoded history slot.
    pub fn action_at(&self, t: usize, slot: usize) -> usize {
        self.levels[t - 1][slot]
    }

    pub fn first_action(&self) -> usize {
        self.levels[0][0]
    }
}

/// Result of [`brute_force_tree_search`].
#[derive(Clone, Debug)]
pub struct TreeSolution {
    pub value: f64,
    pub tree: DecisionTree,
}

/// Expected score of a fixed decision tree: the sum over all (state,
/// observation) paths of the path probability times the trajectory
/// evaluation. Any evaluation form works.
pub fn evaluate_tree(world: &WorldModel, horizon: usize, tree: &DecisionTree) -> f64 {
    assert_eq!(tree.horizon, horizon, "tree built for another horizon");
    assert_eq!(
        tree.num_observations,
        world.num_observations(),
        "tree built for another observation alphabet"
    );
    let mut total = 0.0;
    tree_paths(world, horizon, tree, 1, None, 0, world.evaluation().init(), 1.0, &mut total);
    total
}

#[allow(clippy::too_many_arguments)]
fn tree_paths(
    world: &WorldModel,
    horizon: usize,
    tree: &DecisionTree,
    t: usize,
    prev: Option<(usize, usize)>,
    slot: usize,
    acc: f64,
    weight: f64,
    total: &mut f64,
) {
    let action = tree.action_at(t, slot);
    let state_law = world.state_law(prev);
    for (state, &pz) in state_law.iter().enumerate() {
        if pz == 0.0 {
            continue;
        }
        for (obs, &py) in world.observation_law(state).iter().enumerate() {
            if py == 0.0 {
                continue;
            }
            let acc_next = world
                .evaluation()
                .step(t, horizon, action, obs, state, acc);
            let w = weight * pz * py;
            if t == horizon {
                *total += w * acc_next;
            } else {
                tree_paths(
                    world,
                    horizon,
                    tree,
                    t + 1,
                    Some((state, action)),
                    slot * world.num_observations() + obs,
                    acc_next,
                    w,
                    total,
                );
            }
        }
    }
}

/// Number of decision trees and path operations for given dimensions.
pub fn tree_search_size(world: &WorldModel, horizon: usize) -> (u64, u64) {
    let obs = world.num_observations() as u64;
    let mut slots: u64 = 0;
    let mut level: u64 = 1;
    for _ in 1..=horizon {
        slots = slots.saturating_add(level);
        level = level.saturating_mul(obs);
    }
    let mut trees: u64 = 1;
    for _ in 0..slots.min(10_000) {
        trees = trees.saturating_mul(world.num_actions() as u64);
        if trees == u64::MAX {
            break;
        }
    }
    let mut paths: u64 = 1;
    for _ in 0..horizon {
        paths = paths.saturating_mul(world.num_states() as u64 * obs);
    }
    (trees, trees.saturating_mul(paths))
}

/// Exact maximizer over all decision trees by total enumeration. Ties keep
/// the first tree in lexicographic slot order, which also has the smallest
/// first action among maximizers.
pub fn brute_force_tree_search(
    world: &WorldModel,
    horizon: usize,
    max_trees: u64,
    max_ops: u64,
) -> Result<TreeSolution, OracleError> {
    if horizon == 0 {
        return Err(OracleError::ZeroHorizon);
    }
    let (estimated_trees, estimated_ops) = tree_search_size(world, horizon);
    if estimated_trees > max_trees || estimated_ops > max_ops {
        return Err(OracleError::TreeSearchTooLarge {
            estimated_trees,
            estimated_ops,
            tree_cap: max_trees,
            op_cap: max_ops,
        });
    }

    let obs = world.num_observations();
    let actions = world.num_actions();
    let mut widths = Vec::with_capacity(horizon);
    let mut w = 1;
    for _ in 1..=horizon {
        widths.push(w);
        w *= obs;
    }

    let mut tree = DecisionTree {
        horizon,
        num_observations: obs,
        levels: widths.iter().map(|&n| vec![0; n]).collect(),
    };
    let mut best_value = f64::NEG_INFINITY;
    let mut best_tree = tree.clone();
    loop {
        let value = evaluate_tree(world, horizon, &tree);
        if value > best_value {
            best_value = value;
            best_tree = tree.clone();
        }
        // Odometer over slots, last slot fastest.
        let mut carried = true;
        'bump: for level in tree.levels.iter_mut().rev() {
            for slot in level.iter_mut().rev() {
                *slot += 1;
                if *slot < actions {
                    carried = false;
                    break 'bump;
                }
                *slot = 0;
            }
        }
        if carried {
            break;
        }
    }
    Ok(TreeSolution {
        value: best_value,
        tree: best_tree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{HhmmStructure, PolicyParams};
    use crate::pomdp::{
        exact_policy_value, random_world, RandomEval, DEFAULT_EXACT_TERM_CAP,
    };
    use crate::rng::episode_rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn two_state_world() -> WorldModel {
        WorldModel::new(
            2,
            2,
            2,
            vec![0.6, 0.4],
            vec![0.9, 0.1, 0.2, 0.8, 0.5, 0.5, 0.3, 0.7],
            vec![0.8, 0.2, 0.25, 0.75],
            Evaluation::terminal_action_state(vec![1.0, 0.0, 0.2, 0.5], 2, 2).unwrap(),
        )
        .unwrap()
    }

    fn identity_observation(world: &WorldModel) -> WorldModel {
        let n = world.num_states();
        let mut rows = vec![0.0; n * n];
        for z in 0..n {
            rows[z * n + z] = 1.0;
        }
        world.with_observation(n, rows).unwrap()
    }

    fn uninformative_observation(world: &WorldModel) -> WorldModel {
        world
            .with_observation(1, vec![1.0; world.num_states()])
            .unwrap()
    }

    /// Expected terminal value of a fixed action sequence, by pushing the
    /// state distribution forward. Independent of every solver under test.
    fn open_loop_value(world: &WorldModel, plan: &[usize]) -> f64 {
        let states = world.num_states();
        let mut dist = world.state_law(None).to_vec();
        for &action in &plan[..plan.len() - 1] {
            let mut next = vec![0.0; states];
            for (z, &p) in dist.iter().enumerate() {
                for (z2, &q) in world.state_law(Some((z, action))).iter().enumerate() {
                    next[z2] += p * q;
                }
            }
            dist = next;
        }
        let last = plan[plan.len() - 1];
        dist.iter()
            .enumerate()
            .map(|(z, &p)| {
                p * world
                    .evaluation()
                    .terminal_value(last, 0, z)
                    .expect("terminal eval")
            })
            .sum()
    }

    fn best_open_loop(world: &WorldModel, horizon: usize) -> f64 {
        let actions = world.num_actions();
        let mut plan = vec![0usize; horizon];
        let mut best = f64::NEG_INFINITY;
        loop {
            best = best.max(open_loop_value(world, &plan));
            let mut done = true;
            for slot in plan.iter_mut().rev() {
                *slot += 1;
                if *slot < actions {
                    done = false;
                    break;
                }
                *slot = 0;
            }
            if done {
                return best;
            }
        }
    }

    #[test]
    fn horizon_one_matches_direct_formula() {
        let world = two_state_world();
        // max_x sum_z p(z) V(x, z): x = 0 gives 0.6, x = 1 gives 0.32.
        let mdp = mdp_dp(&world, 1).unwrap();
        assert_abs_diff_eq!(mdp.value, 0.6, epsilon = 1e-12);
        assert_eq!(mdp.first_action, 0);
        let bel = pomdp_belief_dp(&world, 1, DEFAULT_BELIEF_NODE_CAP).unwrap();
        assert_abs_diff_eq!(bel.value, 0.6, epsilon = 1e-12);
        assert_eq!(bel.first_action, 0);
        let tree =
            brute_force_tree_search(&world, 1, DEFAULT_TREE_CAP, DEFAULT_TREE_OP_CAP).unwrap();
        assert_abs_diff_eq!(tree.value, 0.6, epsilon = 1e-12);
        assert_eq!(tree.tree.first_action(), 0);
    }

    #[test]
    fn deterministic_chain_solved_by_hand() {
        // Action x moves to state x; start in 0; one useless observation.
        let world = WorldModel::new(
            2,
            2,
            1,
            vec![1.0, 0.0],
            vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0],
            vec![1.0, 1.0],
            Evaluation::terminal_action_state(vec![0.0, 2.0, 1.0, 5.0], 2, 2).unwrap(),
        )
        .unwrap();
        // Best plan: go to state 1, then score V(1, 1) = 5.
        let mdp = mdp_dp(&world, 2).unwrap();
        assert_abs_diff_eq!(mdp.value, 5.0, epsilon = 1e-12);
        assert_eq!(mdp.first_action, 1);
        let bel = pomdp_belief_dp(&world, 2, DEFAULT_BELIEF_NODE_CAP).unwrap();
        assert_abs_diff_eq!(bel.value, 5.0, epsilon = 1e-12);
        assert_eq!(bel.first_action, 1);
        let tree =
            brute_force_tree_search(&world, 2, DEFAULT_TREE_CAP, DEFAULT_TREE_OP_CAP).unwrap();
        assert_abs_diff_eq!(tree.value, 5.0, epsilon = 1e-12);
        assert_eq!(tree.tree.first_action(), 1);
    }

    #[test]
    fn full_observation_reduces_to_state_dp() {
        for seed in 0..5 {
            let mut rng = episode_rng(900 + seed, crate::rng::StreamSpace::Rollout, 0, 0);
            let base = random_world(&mut rng, 2, 2, 2, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
            let world = identity_observation(&base);
            let mdp = mdp_dp(&world, 3).unwrap();
            let bel = pomdp_belief_dp(&world, 3, DEFAULT_BELIEF_NODE_CAP).unwrap();
            let tree =
                brute_force_tree_search(&world, 3, DEFAULT_TREE_CAP, DEFAULT_TREE_OP_CAP).unwrap();
            assert_abs_diff_eq!(bel.value, mdp.value, epsilon = 1e-9);
            assert_abs_diff_eq!(tree.value, mdp.value, epsilon = 1e-9);
            assert_eq!(bel.first_action, mdp.first_action);
            assert_eq!(tree.tree.first_action(), mdp.first_action);
        }
    }

    #[test]
    fn blind_observation_reduces_to_open_loop() {
        for seed in 0..5 {
            let mut rng = episode_rng(910 + seed, crate::rng::StreamSpace::Rollout, 0, 0);
            let base = random_world(&mut rng, 3, 2, 2, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
            let world = uninformative_observation(&base);
            let want = best_open_loop(&world, 3);
            let bel = pomdp_belief_dp(&world, 3, DEFAULT_BELIEF_NODE_CAP).unwrap();
            let tree =
                brute_force_tree_search(&world, 3, DEFAULT_TREE_CAP, DEFAULT_TREE_OP_CAP).unwrap();
            assert_abs_diff_eq!(bel.value, want, epsilon = 1e-9);
            assert_abs_diff_eq!(tree.value, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_shift_moves_values_by_the_shift() {
        let world = two_state_world();
        let shift = 2.5;
        let shifted = world
            .with_evaluation(
                Evaluation::terminal_action_state(
                    vec![1.0 + shift, 0.0 + shift, 0.2 + shift, 0.5 + shift],
                    2,
                    2,
                )
                .unwrap(),
            )
            .unwrap();
        for horizon in 1..=3 {
            let a = mdp_dp(&world, horizon).unwrap();
            let b = mdp_dp(&shifted, horizon).unwrap();
            assert_abs_diff_eq!(b.value, a.value + shift, epsilon = 1e-9);
            assert_eq!(a.first_action, b.first_action);
            let c = pomdp_belief_dp(&world, horizon, DEFAULT_BELIEF_NODE_CAP).unwrap();
            let d = pomdp_belief_dp(&shifted, horizon, DEFAULT_BELIEF_NODE_CAP).unwrap();
            assert_abs_diff_eq!(d.value, c.value + shift, epsilon = 1e-9);
        }
    }

    #[test]
    fn degrading_observations_cannot_help() {
        for seed in 0..5 {
            let mut rng = episode_rng(920 + seed, crate::rng::StreamSpace::Rollout, 0, 0);
            let base = random_world(&mut rng, 2, 2, 2, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
            let full = identity_observation(&base);
            let blind = uninformative_observation(&base);
            let v_full = pomdp_belief_dp(&full, 3, DEFAULT_BELIEF_NODE_CAP)
                .unwrap()
                .value;
            let v_blind = pomdp_belief_dp(&blind, 3, DEFAULT_BELIEF_NODE_CAP)
                .unwrap()
                .value;
            assert!(
                v_full >= v_blind - 1e-9,
                "full {v_full} < blind {v_blind} (seed {seed})"
            );
        }
    }

    #[test]
    fn single_action_tree_matches_policy_enumeration() {
        let mut rng = episode_rng(930, crate::rng::StreamSpace::Rollout, 0, 0);
        let world = random_world(&mut rng, 3, 1, 2, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
        let tree =
            brute_force_tree_search(&world, 3, DEFAULT_TREE_CAP, DEFAULT_TREE_OP_CAP).unwrap();
        let structure = HhmmStructure::new(vec![1], 1, 2).unwrap();
        let policy = PolicyParams::uniform(&structure);
        let exact = exact_policy_value(&world, &policy, 3, DEFAULT_EXACT_TERM_CAP).unwrap();
        assert_abs_diff_eq!(tree.value, exact, epsilon = 1e-9);
        let bel = pomdp_belief_dp(&world, 3, DEFAULT_BELIEF_NODE_CAP).unwrap();
        assert_abs_diff_eq!(bel.value, exact, epsilon = 1e-9);
    }

    #[test]
    fn no_tree_beats_the_enumerated_optimum() {
        let mut rng = episode_rng(940, crate::rng::StreamSpace::Rollout, 0, 0);
        let world = random_world(&mut rng, 2, 2, 2, RandomEval::ActionState { lo: 0.0, hi: 1.0 });
        let best =
            brute_force_tree_search(&world, 3, DEFAULT_TREE_CAP, DEFAULT_TREE_OP_CAP).unwrap();
        for _ in 0..20 {
            let tree = DecisionTree {
                horizon: 3,
                num_observations: 2,
                levels: vec![
                    vec![rng.random_range(0..2)],
                    (0..2).map(|_| rng.random_range(0..2)).collect(),
                    (0..4).map(|_| rng.random_range(0..2)).collect(),
                ],
            };
            let value = evaluate_tree(&world, 3, &tree);
            assert!(value <= best.value + 1e-12);
        }
    }

    #[test]
    fn ties_pick_the_smallest_action() {
        // All terminal values equal: every plan is optimal.
        let world = two_state_world()
            .with_evaluation(Evaluation::terminal_action_state(vec![1.0; 4], 2, 2).unwrap())
            .unwrap();
        assert_eq!(mdp_dp(&world, 2).unwrap().first_action, 0);
        assert_eq!(
            pomdp_belief_dp(&world, 2, DEFAULT_BELIEF_NODE_CAP)
                .unwrap()
                .first_action,
            0
        );
        assert_eq!(
            brute_force_tree_search(&world, 2, DEFAULT_TREE_CAP, DEFAULT_TREE_OP_CAP)
                .unwrap()
                .tree
                .first_action(),
            0
        );
    }

    #[test]
    fn refusals_carry_size_estimates() {
        let world = two_state_world();
        match pomdp_belief_dp(&world, 4, 10) {
            Err(OracleError::BeliefTreeTooLarge {
                estimated_nodes,
                cap,
            }) => {
                assert_eq!(estimated_nodes, 64); // (2 * 2)^3
                assert_eq!(cap, 10);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
        match brute_force_tree_search(&world, 3, 100, u64::MAX) {
            Err(OracleError::TreeSearchTooLarge {
                estimated_trees, ..
            }) => assert_eq!(estimated_trees, 128), // 2^(1 + 2 + 4)
            other => panic!("expected refusal, got {other:?}"),
        }
        assert!(matches!(mdp_dp(&world, 0), Err(OracleError::ZeroHorizon)));
        let per_step = world
            .with_evaluation(Evaluation::per_step(|_, _, _, _, acc| acc + 1.0))
            .unwrap();
        assert!(matches!(
            mdp_dp(&per_step, 2),
            Err(OracleError::NonTerminalEvaluation)
        ));
        assert!(matches!(
            pomdp_belief_dp(&per_step, 2, DEFAULT_BELIEF_NODE_CAP),
            Err(OracleError::NonTerminalEvaluation)
        ));
        let full_eval = world
            .with_evaluation(Evaluation::terminal_full(vec![0.5; 8], 2, 2, 2).unwrap())
            .unwrap();
        assert!(matches!(
            mdp_dp(&full_eval, 2),
            Err(OracleError::ObservationDependentEvaluation)
        ));
        // The per-step form is no obstacle for path enumeration.
        assert!(
            brute_force_tree_search(&per_step, 2, DEFAULT_TREE_CAP, DEFAULT_TREE_OP_CAP).is_ok()
        );
    }
}
