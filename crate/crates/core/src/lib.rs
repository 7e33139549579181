//! Policy search for finite-horizon partially observable decision problems.
//!
//! The crate is organized around a small set of pieces that compose:
//!
//! * [`pomdp`] — world models (dense tables or generative environments),
//!   episodes, the policy interface, sampling and exact policy evaluation.
//! * [`policy`] — stochastic policies with layered internal memory, their
//!   maximum-likelihood refit from selected episodes, and a versioned
//!   document format.
//! * [`ce`] — the cross-entropy training loop: sample, select elite, refit.
//! * [`oracle`] — exact finite-horizon solvers used as ground truth: state
//!   dynamic programming, belief dynamic programming, decision-tree search.
//! * [`tracking`] — a two-pursuer target-tracking benchmark on a 20x20 grid.
//! * [`hhmm`] — an uncontrolled layered sequence generator with two
//!   interchangeable interpreters (call/return and flattened columns).
//!
//! Everything that consumes randomness draws from counter-based streams so
//! that results are reproducible bit for bit regardless of thread count; see
//! [`rng`].

pub mod ce;
pub mod dist;
pub mod hhmm;
pub mod oracle;
pub mod policy;
pub mod pomdp;
pub mod rng;
mod textfile;
pub mod tracking;

pub use ce::{
    estimate_source_value, run_ce, select_elite, write_history_csv, BlackBox, BlackBoxRun,
    BlackBoxSource, CeConfig, CeError, CeResult, ConvergenceTracker, EnvBlackBox, EpisodeSource,
    GenerativeSource, IterationRecord, IterationStatus, StopReason, IMPROVEMENT_EPS,
};
pub use dist::CondTable;
pub use hhmm::{
    bn_enumerate_sequences, bn_sample, enumerate_sequences, load_hhmm, parse_hhmm, sample_recursive,
    save_hhmm, write_hhmm, HhmmError, HhmmFileError, HhmmSpec, LevelSpec, SampledSequence,
    SequenceDistribution,
};
pub use oracle::{
    brute_force_tree_search, evaluate_tree, mdp_dp, pomdp_belief_dp, tree_search_size,
    BeliefSolution, DecisionTree, MdpSolution, OracleError, TreeSolution,
};
pub use policy::{
    deserialize_policy, ml_update, serialize_policy, HhmmStructure, MemoryVector, MlError,
    PolicyDocError, PolicyParams,
};
pub use pomdp::{
    estimate_policy_value, exact_policy_value, load_world, parse_world, sample_episode, save_world,
    write_world, Environment, Episode, Evaluation, Policy, SampleError, ValueEstimate, WorldModel,
    WorldFileError,
};
pub use rng::{episode_rng, stream_rng, StreamSpace};
pub use tracking::{
    joint_action, split_action, Heading, MobilePose, Move, TrackingCase, TrackingConfig,
    TrackingEnv, TrackingError, TrackingState,
};
