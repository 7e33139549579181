//! Selective training loop.
//!
//! Each iteration draws a batch of episodes under the current policy,
//! keeps the best fraction, and refits the policy tables on the kept
//! episodes in closed form. The loop stops when the elite mean has gone
//! a full patience window without improving on its historical best, or
//! when the iteration budget runs out.
//!
//! Episodes come from an [`EpisodeSource`], which is either a generative
//! model (drawn through [`crate::pomdp::sample_episode`]) or an opaque
//! simulator driven one action at a time. Both consume randomness in the
//! same order, so a model wrapped as a black box reproduces the exact
//! episodes of its generative twin under the same seed.

use rand::RngCore;
use rayon::prelude::*;
use thiserror::Error;

use crate::policy::{ml_update, HhmmStructure, MlError, PolicyParams};
use crate::pomdp::{sample_episode, Environment, Episode, Policy, SampleError, ValueEstimate};
use crate::rng::{episode_rng, StreamSpace};

/// An elite mean must beat the historical best by more than this to count
/// as progress.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CeError {
    #[error("selective rate must lie strictly between 0 and 1, got {0}")]
    BadSelectiveRate(f64),
    #[error("need at least 2 samples per iteration, got {0}")]
    TooFewSamples(usize),
    #[error("patience must be at least 1")]
    ZeroPatience,
    #[error("need at least 1 iteration")]
    ZeroIterations,
    #[error("smoothing must be finite and nonnegative, got {0}")]
    BadSmoothing(f64),
    #[error("policy structure emits {structure} {kind}s but the source expects {found}")]
    StructureMismatch {
        kind: &'static str,
        structure: usize,
        found: usize,
    },
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Ml(#[from] MlError),
}

/// Loop parameters. `selective_rate` is the kept fraction per iteration;
/// `patience` counts consecutive unimproved iterations before stopping.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct CeConfig {
    pub samples_per_iteration: usize,
    pub selective_rate: f64,
    pub horizon: usize,
    pub patience: u32,
    pub max_iterations: u32,
    pub smoothing: f64,
    pub seed: u64,
    /// Rollouts for the final score estimate of the returned policy.
    pub evaluation_rollouts: usize,
}

impl CeConfig {
    pub fn validate(&self) -> Result<(), CeError> {
        if !(self.selective_rate > 0.0 && self.selective_rate < 1.0) {
            return Err(CeError::BadSelectiveRate(self.selective_rate));
        }
        if self.samples_per_iteration < 2 {
            return Err(CeError::TooFewSamples(self.samples_per_iteration));
        }
        if self.horizon == 0 {
            return Err(CeError::Sample(SampleError::ZeroHorizon));
        }
        if self.patience == 0 {
            return Err(CeError::ZeroPatience);
        }
        if self.max_iterations == 0 {
            return Err(CeError::ZeroIterations);
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(CeError::BadSmoothing(self.smoothing));
        }
        if self.evaluation_rollouts < 2 {
            return Err(CeError::Sample(SampleError::TooFewRollouts(
                self.evaluation_rollouts,
            )));
        }
        Ok(())
    }
}

/// Indices of the ceil(rate * n) highest scores, ties broken toward the
/// smaller index. Returned ascending. `scores` must be nonempty and
/// `rate` strictly inside (0, 1).
pub fn select_elite(scores: &[f64], rate: f64) -> Vec<usize> {
    assert!(!scores.is_empty(), "no scores to select from");
    assert!(rate > 0.0 && rate < 1.0, "rate must lie in (0, 1)");
    let n = scores.len();
    let keep = ((rate * n as f64).ceil() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut elite = order[..keep].to_vec();
    elite.sort_unstable();
    elite
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterationStatus {
    /// Elite mean beat the historical best.
    Improved,
    /// No improvement, patience not yet exhausted.
    Unsuccessful,
    /// No improvement for a full patience window.
    Converged,
}

/// Tracks the best elite mean seen so far and the run of iterations that
/// failed to beat it.
#[derive(Clone, Debug)]
pub struct ConvergenceTracker {
    best: f64,
    unsuccessful: u32,
    patience: u32,
}

impl ConvergenceTracker {
    pub fn new(patience: u32) -> ConvergenceTracker {
        assert!(patience >= 1, "patience must be at least 1");
        ConvergenceTracker {
            best: f64::NEG_INFINITY,
            unsuccessful: 0,
            patience,
        }
    }

    /// Feed one iteration's elite mean.
    pub fn register(&mut self, elite_mean: f64) -> IterationStatus {
        if elite_mean > self.best + IMPROVEMENT_EPS {
            self.best = elite_mean;
            self.unsuccessful = 0;
            IterationStatus::Improved
        } else {
            self.unsuccessful += 1;
            if self.unsuccessful >= self.patience {
                IterationStatus::Converged
            } else {
                IterationStatus::Unsuccessful
            }
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn unsuccessful(&self) -> u32 {
        self.unsuccessful
    }
}

/// One line of the training history.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iteration: u32,
    /// Lowest score that still made the elite set.
    pub elite_threshold: f64,
    pub elite_mean: f64,
    /// Best elite mean up to and including this iteration.
    pub best_so_far: f64,
    /// Consecutive unimproved iterations after this one.
    pub unsuccessful: u32,
}

/// Write the history as CSV with a header line.
pub fn write_history_csv<W: std::io::Write>(
    history: &[IterationRecord],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(
        out,
        "iteration,elite_threshold,elite_mean,best_so_far,unsuccessful"
    )?;
    for r in history {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration, r.elite_threshold, r.elite_mean, r.best_so_far, r.unsuccessful
        )?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
}

/// Outcome of [`run_ce`]: the policy whose batch produced the best elite
/// mean (as sampler, before its refit), its held-out score estimate, and
/// the per-iteration history.
#[derive(Clone, Debug)]
pub struct CeResult {
    pub best_params: PolicyParams,
    pub best_mean_score: f64,
    pub best_std_error: f64,
    pub history: Vec<IterationRecord>,
    pub iterations_run: u32,
    pub stop_reason: StopReason,
}

/// Where episodes come from. Implementations must be deterministic given
/// the rng: the training loop replays sources by seed.
pub trait EpisodeSource: Sync {
    fn num_actions(&self) -> usize;
    fn num_observations(&self) -> usize;
    /// Run one full episode under `policy`.
    fn draw(
        &self,
        policy: &dyn Policy,
        horizon: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Episode, SampleError>;
}

/// Episode source backed by a generative model.
pub struct GenerativeSource<E>(pub E);

impl<E: Environment> EpisodeSource for GenerativeSource<E> {
    fn num_actions(&self) -> usize {
        self.0.num_actions()
    }

    fn num_observations(&self) -> usize {
        self.0.num_observations()
    }

    fn draw(
        &self,
        policy: &dyn Policy,
        horizon: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Episode, SampleError> {
        sample_episode(&self.0, policy, horizon, rng)
    }
}

/// Opaque simulator: accepts actions, returns observations, scores the
/// run at the end. No state sequence, no laws.
pub trait BlackBox: Sync {
    fn num_actions(&self) -> usize;
    fn num_observations(&self) -> usize;
    /// Begin a run of exactly `horizon` steps.
    fn start(&self, horizon: usize, rng: &mut dyn RngCore) -> Box<dyn BlackBoxRun + '_>;
}

pub trait BlackBoxRun {
    /// Execute one action, observe the world's reply.
    fn apply(&mut self, action: usize, rng: &mut dyn RngCore) -> usize;
    /// Final score; call after the last step.
    fn score(&self) -> f64;
}

/// Episode source backed by a black box.
pub struct BlackBoxSource<B>(pub B);

impl<B: BlackBox> EpisodeSource for BlackBoxSource<B> {
    fn num_actions(&self) -> usize {
        self.0.num_actions()
    }

    fn num_observations(&self) -> usize {
        self.0.num_observations()
    }

    fn draw(
        &self,
        policy: &dyn Policy,
        horizon: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Episode, SampleError> {
        if horizon == 0 {
            return Err(SampleError::ZeroHorizon);
        }
        let mut run = self.0.start(horizon, rng);
        let mut actions = Vec::with_capacity(horizon);
        let mut observations = Vec::with_capacity(horizon);
        let mut memories = Vec::with_capacity(horizon);
        for t in 1..=horizon {
            let prev_memory = if t >= 2 { Some(&memories[t - 2]) } else { None };
            let prev_observation = if t >= 2 {
                Some(observations[t - 2])
            } else {
                None
            };
            let (memory, action) = policy.sample_step(prev_memory, prev_observation, rng);
            let observation = run.apply(action, rng);
            actions.push(action);
            observations.push(observation);
            memories.push(memory);
        }
        Ok(Episode {
            actions,
            observations,
            states: None,
            memories,
            score: run.score(),
        })
    }
}

/// Present a generative model as a black box. Laws stay hidden; the draw
/// order matches [`sample_episode`] exactly, so episodes are identical
/// under the same rng.
pub struct EnvBlackBox<E>(pub E);

struct EnvRun<'a, E> {
    env: &'a E,
    horizon: usize,
    t: usize,
    prev: Option<(usize, usize)>,
    acc: f64,
}

impl<E: Environment> BlackBox for EnvBlackBox<E> {
    fn num_actions(&self) -> usize {
        self.0.num_actions()
    }

    fn num_observations(&self) -> usize {
        self.0.num_observations()
    }

    fn start(&self, horizon: usize, _rng: &mut dyn RngCore) -> Box<dyn BlackBoxRun + '_> {
        Box::new(EnvRun {
            env: &self.0,
            horizon,
            t: 0,
            prev: None,
            acc: self.0.eval_init(),
        })
    }
}

impl<E: Environment> BlackBoxRun for EnvRun<'_, E> {
    fn apply(&mut self, action: usize, rng: &mut dyn RngCore) -> usize {
        self.t += 1;
        let state = match self.prev {
            None => self.env.draw_initial(rng),
            Some((z, x)) => self.env.draw_step(z, x, rng),
        };
        let observation = self.env.draw_observation(state, rng);
        self.acc = self
            .env
            .eval_step(self.t, self.horizon, action, observation, state, self.acc);
        self.prev = Some((state, action));
        observation
    }

    fn score(&self) -> f64 {
        debug_assert_eq!(self.t, self.horizon, "scored before the last step");
        self.acc
    }
}

fn check_source<S: EpisodeSource + ?Sized>(
    source: &S,
    structure: &HhmmStructure,
) -> Result<(), CeError> {
    if structure.num_actions != source.num_actions() {
        return Err(CeError::StructureMismatch {
            kind: "action",
            structure: structure.num_actions,
            found: source.num_actions(),
        });
    }
    if structure.num_observations != source.num_observations() {
        return Err(CeError::StructureMismatch {
            kind: "observation",
            structure: structure.num_observations,
            found: source.num_observations(),
        });
    }
    Ok(())
}

fn draw_batch<S: EpisodeSource + ?Sized>(
    source: &S,
    policy: &PolicyParams,
    horizon: usize,
    count: usize,
    seed: u64,
    space: StreamSpace,
    iteration: u64,
) -> Result<Vec<Episode>, SampleError> {
    // Indexed streams plus an ordered collect keep the batch independent
    // of the rayon thread count.
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = episode_rng(seed, space, iteration, i as u64);
            source.draw(policy, horizon, &mut rng)
        })
        .collect()
}

/// Train a policy of the given structure against the source.
pub fn run_ce<S: EpisodeSource + ?Sized>(
    source: &S,
    structure: &HhmmStructure,
    config: &CeConfig,
) -> Result<CeResult, CeError> {
    config.validate()?;
    check_source(source, structure)?;

    let mut params = PolicyParams::uniform(structure);
    let mut best_params = params.clone();
    let mut tracker = ConvergenceTracker::new(config.patience);
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut stop_reason = StopReason::MaxIterations;

    for iteration in 1..=config.max_iterations {
        let episodes = draw_batch(
            source,
            &params,
            config.horizon,
            config.samples_per_iteration,
            config.seed,
            StreamSpace::Training,
            iteration as u64,
        )?;
        let scores: Vec<f64> = episodes.iter().map(|e| e.score).collect();
        let elite = select_elite(&scores, config.selective_rate);
        let elite_threshold = elite
            .iter()
            .map(|&i| scores[i])
            .fold(f64::INFINITY, f64::min);
        let elite_mean =
            elite.iter().map(|&i| scores[i]).sum::<f64>() / elite.len() as f64;

        let status = tracker.register(elite_mean);
        if status == IterationStatus::Improved {
            // Snapshot the sampler, not its refit: this is the policy the
            // winning batch was drawn from.
            best_params = params.clone();
        }
        history.push(IterationRecord {
            iteration,
            elite_threshold,
            elite_mean,
            best_so_far: tracker.best(),
            unsuccessful: tracker.unsuccessful(),
        });
        if status == IterationStatus::Converged {
            stop_reason = StopReason::Converged;
            break;
        }

        let selected: Vec<&Episode> = elite.iter().map(|&i| &episodes[i]).collect();
        params = ml_update(structure, &selected, config.smoothing, &params)?;
    }

    let evaluation = estimate_source_value(
        source,
        &best_params,
        config.horizon,
        config.evaluation_rollouts,
        config.seed,
    )?;
    let iterations_run = history.len() as u32;
    Ok(CeResult {
        best_params,
        best_mean_score: evaluation.mean,
        best_std_error: evaluation.std_error,
        history,
        iterations_run,
        stop_reason,
    })
}

/// Mean score of a policy over fresh evaluation-stream rollouts, with its
/// standard error. Works for any source, black boxes included.
pub fn estimate_source_value<S: EpisodeSource + ?Sized>(
    source: &S,
    policy: &PolicyParams,
    horizon: usize,
    rollouts: usize,
    seed: u64,
) -> Result<ValueEstimate, SampleError> {
    if rollouts < 2 {
        return Err(SampleError::TooFewRollouts(rollouts));
    }
    let episodes = draw_batch(
        source,
        policy,
        horizon,
        rollouts,
        seed,
        StreamSpace::Evaluation,
        0,
    )?;
    let scores: Vec<f64> = episodes.iter().map(|e| e.score).collect();
    let mean = scores.iter().sum::<f64>() / rollouts as f64;
    let var_sum: f64 = scores.iter().map(|s| (s - mean) * (s - mean)).sum();
    let std_error = (var_sum / (rollouts as f64 * (rollouts as f64 - 1.0))).sqrt();
    Ok(ValueEstimate {
        mean,
        std_error,
        rollouts,
    })
}
