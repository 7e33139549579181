//! Finite-horizon partially observable decision processes.
//!
//! The chain alternates as follows. At step t the policy draws its memory
//! and an action from the previous observation; the state moves under the
//! *previous* action; the observation reflects the new state; the running
//! evaluation absorbs the step:
//!
//! ```text
//! x_t ~ policy(y_{t-1}, m_{t-1})      (before-start at t = 1)
//! z_t ~ p(. | z_{t-1}, x_{t-1})       (initial law at t = 1)
//! y_t ~ p(. | z_t)
//! acc_t = v_t(x_t, y_t, z_t, acc_{t-1})
//! ```
//!
//! The first action therefore cannot influence the first state; an action
//! taken at step t lands in the state at step t + 1.

mod exact;
mod file;
mod gen;
mod sample;

pub use exact::{exact_policy_value, ExactError, DEFAULT_EXACT_TERM_CAP};
pub use file::{load_world, parse_world, save_world, write_world, WorldFileError};
pub use gen::{random_policy_params, random_world, RandomEval};
pub use sample::{estimate_policy_value, sample_episode, ValueEstimate};

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

use crate::dist::{sample_index, TableError, MODEL_ROW_TOL};
use crate::policy::MemoryVector;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{table} table has {got} entries, expected {expected}")]
    BadShape {
        table: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{table} table: {source}")]
    BadTable {
        table: &'static str,
        source: TableError,
    },
    #[error("cardinalities must be at least 1")]
    EmptyCardinality,
}

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("policy emits {policy} {kind}s but the world expects {world}")]
    CardinalityMismatch {
        kind: &'static str,
        policy: usize,
        world: usize,
    },
    #[error("need at least 2 rollouts for a standard error, got {0}")]
    TooFewRollouts(usize),
}

/// Trajectory evaluation. All variants reduce to a per-step accumulator:
/// terminal tables leave the accumulator alone until the last step.
#[derive(Clone)]
pub enum Evaluation {
    /// V_T(x_T, z_T), row-major over actions then states.
    TerminalActionState {
        values: Vec<f64>,
        num_actions: usize,
        num_states: usize,
    },
    /// V_T(x_T, y_T, z_T), row-major over actions, observations, states.
    TerminalFull {
        values: Vec<f64>,
        num_actions: usize,
        num_observations: usize,
        num_states: usize,
    },
    /// v_t(t, x_t, y_t, z_t, acc) applied at every step.
    PerStep(Arc<dyn Fn(usize, usize, usize, usize, f64) -> f64 + Send + Sync>),
}

impl Evaluation {
    pub fn terminal_action_state(
        values: Vec<f64>,
        num_actions: usize,
        num_states: usize,
    ) -> Result<Self, ModelError> {
        if values.len() != num_actions * num_states {
            return Err(ModelError::BadShape {
                table: "evaluation",
                expected: num_actions * num_states,
                got: values.len(),
            });
        }
        Ok(Evaluation::TerminalActionState {
            values,
            num_actions,
            num_states,
        })
    }

    pub fn terminal_full(
        values: Vec<f64>,
        num_actions: usize,
        num_observations: usize,
        num_states: usize,
    ) -> Result<Self, ModelError> {
        if values.len() != num_actions * num_observations * num_states {
            return Err(ModelError::BadShape {
                table: "evaluation",
                expected: num_actions * num_observations * num_states,
                got: values.len(),
            });
        }
        Ok(Evaluation::TerminalFull {
            values,
            num_actions,
            num_observations,
            num_states,
        })
    }

    pub fn per_step<F>(f: F) -> Self
    where
        F: Fn(usize, usize, usize, usize, f64) -> f64 + Send + Sync + 'static,
    {
        Evaluation::PerStep(Arc::new(f))
    }

    pub fn init(&self) -> f64 {
        0.0
    }

    /// Advance the accumulator through step `t` of `horizon`.
    pub fn step(
        &self,
        t: usize,
        horizon: usize,
        action: usize,
        observation: usize,
        state: usize,
        acc: f64,
    ) -> f64 {
        match self {
            Evaluation::TerminalActionState {
                values, num_states, ..
            } => {
                if t == horizon {
                    values[action * num_states + state]
                } else {
                    acc
                }
            }
            Evaluation::TerminalFull {
                values,
                num_observations,
                num_states,
                ..
            } => {
                if t == horizon {
                    values[(action * num_observations + observation) * num_states + state]
                } else {
                    acc
                }
            }
            Evaluation::PerStep(f) => f(t, action, observation, state, acc),
        }
    }

    /// Score a complete trajectory.
    pub fn evaluate(&self, actions: &[usize], observations: &[usize], states: &[usize]) -> f64 {
        let horizon = actions.len();
        assert_eq!(observations.len(), horizon);
        assert_eq!(states.len(), horizon);
        let mut acc = self.init();
        for t in 1..=horizon {
            acc = self.step(
                t,
                horizon,
                actions[t - 1],
                observations[t - 1],
                states[t - 1],
                acc,
            );
        }
        acc
    }

    /// Terminal value as a function of (x, y, z); `None` for per-step forms.
    pub fn terminal_value(&self, action: usize, observation: usize, state: usize) -> Option<f64> {
        match self {
            Evaluation::TerminalActionState {
                values, num_states, ..
            } => Some(values[action * num_states + state]),
            Evaluation::TerminalFull {
                values,
                num_observations,
                num_states,
                ..
            } => Some(values[(action * num_observations + observation) * num_states + state]),
            Evaluation::PerStep(_) => None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, Evaluation::PerStep(_))
    }

    /// True when the terminal value ignores the observation.
    pub fn is_observation_free(&self) -> bool {
        matches!(self, Evaluation::TerminalActionState { .. })
    }
}

impl fmt::Debug for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluation::TerminalActionState {
                num_actions,
                num_states,
                ..
            } => write!(f, "TerminalActionState({num_actions}x{num_states})"),
            Evaluation::TerminalFull {
                num_actions,
                num_observations,
                num_states,
                ..
            } => write!(
                f,
                "TerminalFull({num_actions}x{num_observations}x{num_states})"
            ),
            Evaluation::PerStep(_) => write!(f, "PerStep(..)"),
        }
    }
}

/// Dense tabular world model: initial law, controlled transition law,
/// observation law, trajectory evaluation.
#[derive(Clone, Debug)]
pub struct WorldModel {
    num_states: usize,
    num_actions: usize,
    num_observations: usize,
    initial: Vec<f64>,
    /// Row-major over (z_prev, x_prev), each row a law over z.
    transition: Vec<f64>,
    /// Row-major over z, each row a law over y.
    observation: Vec<f64>,
    evaluation: Evaluation,
}

impl WorldModel {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        num_observations: usize,
        initial: Vec<f64>,
        transition: Vec<f64>,
        observation: Vec<f64>,
        evaluation: Evaluation,
    ) -> Result<Self, ModelError> {
        if num_states == 0 || num_actions == 0 || num_observations == 0 {
            return Err(ModelError::EmptyCardinality);
        }
        check_table("initial", &initial, 1, num_states)?;
        check_table(
            "transition",
            &transition,
            num_states * num_actions,
            num_states,
        )?;
        check_table("observation", &observation, num_states, num_observations)?;
        match &evaluation {
            Evaluation::TerminalActionState {
                values,
                num_actions: a,
                num_states: z,
            } => {
                if *a != num_actions || *z != num_states {
                    return Err(ModelError::BadShape {
                        table: "evaluation",
                        expected: num_actions * num_states,
                        got: values.len(),
                    });
                }
            }
            Evaluation::TerminalFull {
                values,
                num_actions: a,
                num_observations: y,
                num_states: z,
            } => {
                if *a != num_actions || *y != num_observations || *z != num_states {
                    return Err(ModelError::BadShape {
                        table: "evaluation",
                        expected: num_actions * num_observations * num_states,
                        got: values.len(),
                    });
                }
            }
            Evaluation::PerStep(_) => {}
        }
        Ok(WorldModel {
            num_states,
            num_actions,
            num_observations,
            initial,
            transition,
            observation,
            evaluation,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_observations(&self) -> usize {
        self.num_observations
    }

    pub fn evaluation(&self) -> &Evaluation {
        &self.evaluation
    }

    /// Law of z_t. `None` is the before-start case (initial law).
    pub fn state_law(&self, prev: Option<(usize, usize)>) -> &[f64] {
        match prev {
            None => &self.initial,
            Some((z, x)) => {
                let row = z * self.num_actions + x;
                &self.transition[row * self.num_states..(row + 1) * self.num_states]
            }
        }
    }

    /// Law of y_t given z_t.
    pub fn observation_law(&self, state: usize) -> &[f64] {
        &self.observation[state * self.num_observations..(state + 1) * self.num_observations]
    }

    /// Same model with a different evaluation.
    pub fn with_evaluation(&self, evaluation: Evaluation) -> Result<Self, ModelError> {
        WorldModel::new(
            self.num_states,
            self.num_actions,
            self.num_observations,
            self.initial.clone(),
            self.transition.clone(),
            self.observation.clone(),
            evaluation,
        )
    }

    /// Same dynamics with the observation law replaced.
    pub fn with_observation(
        &self,
        num_observations: usize,
        observation: Vec<f64>,
    ) -> Result<Self, ModelError> {
        WorldModel::new(
            self.num_states,
            self.num_actions,
            num_observations,
            self.initial.clone(),
            self.transition.clone(),
            observation,
            self.evaluation.clone(),
        )
    }
}

fn check_table(
    table: &'static str,
    data: &[f64],
    rows: usize,
    cols: usize,
) -> Result<(), ModelError> {
    if data.len() != rows * cols {
        return Err(ModelError::BadShape {
            table,
            expected: rows * cols,
            got: data.len(),
        });
    }
    for r in 0..rows {
        let row = &data[r * cols..(r + 1) * cols];
        let mut sum = 0.0;
        for (c, &v) in row.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(ModelError::BadTable {
                    table,
                    source: TableError::NegativeEntry {
                        row: r,
                        column: c,
                        value: v,
                    },
                });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > MODEL_ROW_TOL {
            return Err(ModelError::BadTable {
                table,
                source: TableError::BadRow {
                    row: r,
                    sum,
                    tol: MODEL_ROW_TOL,
                },
            });
        }
    }
    Ok(())
}

/// Generative world: anything that can drive an episode. Dense models and
/// simulation benchmarks implement the same surface, so the sampling loop
/// and the training loop never care which one they run against.
pub trait Environment: Sync {
    fn num_actions(&self) -> usize;
    fn num_observations(&self) -> usize;
    /// Draw z_1. Actions cannot influence it.
    fn draw_initial(&self, rng: &mut dyn RngCore) -> usize;
    /// Draw z_t from (z_{t-1}, x_{t-1}).
    fn draw_step(&self, prev_state: usize, prev_action: usize, rng: &mut dyn RngCore) -> usize;
    /// Draw y_t from z_t.
    fn draw_observation(&self, state: usize, rng: &mut dyn RngCore) -> usize;
    fn eval_init(&self) -> f64 {
        0.0
    }
    fn eval_step(
        &self,
        t: usize,
        horizon: usize,
        action: usize,
        observation: usize,
        state: usize,
        acc: f64,
    ) -> f64;
}

impl Environment for WorldModel {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn num_observations(&self) -> usize {
        self.num_observations
    }

    fn draw_initial(&self, rng: &mut dyn RngCore) -> usize {
        sample_index(&self.initial, rng)
    }

    fn draw_step(&self, prev_state: usize, prev_action: usize, rng: &mut dyn RngCore) -> usize {
        sample_index(self.state_law(Some((prev_state, prev_action))), rng)
    }

    fn draw_observation(&self, state: usize, rng: &mut dyn RngCore) -> usize {
        sample_index(self.observation_law(state), rng)
    }

    fn eval_step(
        &self,
        t: usize,
        horizon: usize,
        action: usize,
        observation: usize,
        state: usize,
        acc: f64,
    ) -> f64 {
        self.evaluation.step(t, horizon, action, observation, state, acc)
    }
}

/// Stochastic policy with internal memory.
///
/// A step draws the full memory vector and the action jointly; `step_prob`
/// is the matching density. Over all (memory, action) pairs the step
/// probabilities sum to 1 for any conditioning.
pub trait Policy: Sync {
    fn num_actions(&self) -> usize;
    fn num_observations(&self) -> usize;
    /// Cardinality of each memory level, bottom first.
    fn memory_shape(&self) -> &[usize];
    /// Draw (m_t, x_t) given (m_{t-1}, y_{t-1}); `None` before the start.
    fn sample_step(
        &self,
        prev_memory: Option<&MemoryVector>,
        prev_observation: Option<usize>,
        rng: &mut dyn RngCore,
    ) -> (MemoryVector, usize);
    /// P(m_t, x_t | m_{t-1}, y_{t-1}).
    fn step_prob(
        &self,
        prev_memory: Option<&MemoryVector>,
        prev_observation: Option<usize>,
        memory: &MemoryVector,
        action: usize,
    ) -> f64;
}

/// One sampled run: per-step actions, observations, memory records, the
/// state sequence when the world exposes it, and the final score.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub actions: Vec<usize>,
    pub observations: Vec<usize>,
    /// Present for model-backed worlds, absent for black boxes.
    pub states: Option<Vec<usize>>,
    pub memories: Vec<MemoryVector>,
    pub score: f64,
}

impl Episode {
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }
}
