//! Pursuit benchmark on a square grid.
//!
//! Two mobiles chase a slow target. Coordinate i grows to the right,
//! coordinate j grows downward; the grid spans 0..grid on both axes. Each
//! mobile has a heading and four moves: turn left, turn right, one cell
//! forward, or hold. Forward into a wall is a hold. A joint action packs
//! both moves: the first mobile in the low two bits, the second in the
//! high two.
//!
//! The target shuffles by at most one cell per step (diagonals allowed,
//! staying put allowed). Each candidate cell is weighted by the sum of
//! squared Euclidean distances to the two mobiles at their positions
//! before the move, so the target drifts away from wherever the mobiles
//! just were. If every weight is zero the law is uniform.
//!
//! The observation carries four bits per step, two per mobile: "target
//! strictly ahead of me" and "target within Chebyshev distance < radius".
//! The score counts the steps where some mobile has the target within
//! Chebyshev distance <= radius.
//!
//! Three variants:
//! * [`TrackingCase::Fixed`]: the target sits still at the grid center.
//! * [`TrackingCase::Blind`]: the target roams but observations read 0.
//! * [`TrackingCase::Roaming`]: the target roams, observations intact.

mod render;

pub use render::{parse_frame, RenderError};

use rand::RngCore;
use thiserror::Error;

use crate::dist::sample_index;
use crate::pomdp::{Environment, Episode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heading {
    Up,
    Right,
    Down,
    Left,
}

impl Heading {
    pub fn turned_right(self) -> Heading {
        match self {
            Heading::Up => Heading::Right,
            Heading::Right => Heading::Down,
            Heading::Down => Heading::Left,
            Heading::Left => Heading::Up,
        }
    }

    pub fn turned_left(self) -> Heading {
        match self {
            Heading::Up => Heading::Left,
            Heading::Left => Heading::Down,
            Heading::Down => Heading::Right,
            Heading::Right => Heading::Up,
        }
    }

    /// Unit displacement (di, dj) of a forward move.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::Up => (0, -1),
            Heading::Right => (1, 0),
            Heading::Down => (0, 1),
            Heading::Left => (-1, 0),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Heading::Up => 'U',
            Heading::Right => 'R',
            Heading::Down => 'D',
            Heading::Left => 'L',
        }
    }

    pub fn index(self) -> usize {
        match self {
            Heading::Up => 0,
            Heading::Right => 1,
            Heading::Down => 2,
            Heading::Left => 3,
        }
    }

    pub fn from_index(index: usize) -> Heading {
        match index {
            0 => Heading::Up,
            1 => Heading::Right,
            2 => Heading::Down,
            3 => Heading::Left,
            _ => panic!("heading index {index} out of range"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    TurnLeft,
    TurnRight,
    Forward,
    Hold,
}

impl Move {
    pub fn index(self) -> usize {
        match self {
            Move::TurnLeft => 0,
            Move::TurnRight => 1,
            Move::Forward => 2,
            Move::Hold => 3,
        }
    }

    pub fn from_index(index: usize) -> Move {
        match index {
            0 => Move::TurnLeft,
            1 => Move::TurnRight,
            2 => Move::Forward,
            3 => Move::Hold,
            _ => panic!("move index {index} out of range"),
        }
    }
}

/// Joint action of both mobiles, one of 16.
pub fn joint_action(first: Move, second: Move) -> usize {
    second.index() * 4 + first.index()
}

/// Inverse of [`joint_action`].
pub fn split_action(action: usize) -> (Move, Move) {
    (Move::from_index(action % 4), Move::from_index(action / 4))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MobilePose {
    pub i: i32,
    pub j: i32,
    pub heading: Heading,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrackingState {
    pub target: (i32, i32),
    pub first: MobilePose,
    pub second: MobilePose,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackingCase {
    Fixed,
    Blind,
    Roaming,
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct TrackingConfig {
    pub case: TrackingCase,
    /// Side of the square grid.
    pub grid: i32,
    /// Chebyshev radius: strict for the nearness bit, inclusive for the
    /// score.
    pub radius: i32,
    /// Nominal episode length; the environment itself is horizon-free.
    pub horizon: usize,
}

impl TrackingConfig {
    pub fn standard(case: TrackingCase) -> TrackingConfig {
        TrackingConfig {
            case,
            grid: 20,
            radius: 3,
            horizon: 100,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrackingError {
    #[error("grid side must be at least 2, got {0}")]
    GridTooSmall(i32),
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(i32),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
}

pub struct TrackingEnv {
    config: TrackingConfig,
}

fn chebyshev(a: (i32, i32), b: (i32, i32)) -> i32 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn squared_euclidean(a: (i32, i32), b: (i32, i32)) -> f64 {
    let di = (a.0 - b.0) as f64;
    let dj = (a.1 - b.1) as f64;
    di * di + dj * dj
}

impl TrackingEnv {
    pub fn new(config: TrackingConfig) -> Result<TrackingEnv, TrackingError> {
        if config.grid < 2 {
            return Err(TrackingError::GridTooSmall(config.grid));
        }
        if config.radius < 0 {
            return Err(TrackingError::NegativeRadius(config.radius));
        }
        if config.horizon == 0 {
            return Err(TrackingError::ZeroHorizon);
        }
        Ok(TrackingEnv { config })
    }

    pub fn standard(case: TrackingCase) -> TrackingEnv {
        TrackingEnv::new(TrackingConfig::standard(case)).expect("standard config is valid")
    }

    pub fn config(&self) -> &TrackingConfig {
        &self.config
    }

    pub fn grid(&self) -> i32 {
        self.config.grid
    }

    fn in_grid(&self, cell: (i32, i32)) -> bool {
        let g = self.config.grid;
        (0..g).contains(&cell.0) && (0..g).contains(&cell.1)
    }

    /// Apply one move to a mobile. Forward into a wall holds position.
    pub fn mobile_move(&self, pose: MobilePose, mv: Move) -> MobilePose {
        match mv {
            Move::TurnLeft => MobilePose {
                heading: pose.heading.turned_left(),
                ..pose
            },
            Move::TurnRight => MobilePose {
                heading: pose.heading.turned_right(),
                ..pose
            },
            Move::Hold => pose,
            Move::Forward => {
                let (di, dj) = pose.heading.delta();
                let next = (pose.i + di, pose.j + dj);
                if self.in_grid(next) {
                    MobilePose {
                        i: next.0,
                        j: next.1,
                        ..pose
                    }
                } else {
                    pose
                }
            }
        }
    }

    /// True when the target lies strictly ahead of the pose, in the half
    /// plane the heading points into.
    fn sees_forward(&self, pose: &MobilePose, target: (i32, i32)) -> bool {
        match pose.heading {
            Heading::Up => target.1 < pose.j,
            Heading::Right => target.0 > pose.i,
            Heading::Down => target.1 > pose.j,
            Heading::Left => target.0 < pose.i,
        }
    }

    fn is_near(&self, pose: &MobilePose, target: (i32, i32)) -> bool {
        chebyshev((pose.i, pose.j), target) < self.config.radius
    }

    /// Four observation bits; all zero in the blind case.
    pub fn observe(&self, state: &TrackingState) -> usize {
        if self.config.case == TrackingCase::Blind {
            return 0;
        }
        let mut bits = 0;
        if self.sees_forward(&state.first, state.target) {
            bits |= 1;
        }
        if self.is_near(&state.first, state.target) {
            bits |= 2;
        }
        if self.sees_forward(&state.second, state.target) {
            bits |= 4;
        }
        if self.is_near(&state.second, state.target) {
            bits |= 8;
        }
        bits
    }

    /// True when some mobile has the target within the radius, inclusive.
    pub fn encounter(&self, state: &TrackingState) -> bool {
        let d1 = chebyshev((state.first.i, state.first.j), state.target);
        let d2 = chebyshev((state.second.i, state.second.j), state.target);
        d1.min(d2) <= self.config.radius
    }

    /// Law of the target's next cell given the current state. Support in
    /// reading order (dj outer from -1 to 1, di inner), weights normalized.
    pub fn target_step_distribution(&self, state: &TrackingState) -> Vec<((i32, i32), f64)> {
        let first = (state.first.i, state.first.j);
        let second = (state.second.i, state.second.j);
        let mut cells = Vec::with_capacity(9);
        let mut weights = Vec::with_capacity(9);
        for dj in -1..=1 {
            for di in -1..=1 {
                let cell = (state.target.0 + di, state.target.1 + dj);
                if self.in_grid(cell) {
                    cells.push(cell);
                    weights.push(
                        squared_euclidean(cell, first) + squared_euclidean(cell, second),
                    );
                }
            }
        }
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            let u = 1.0 / cells.len() as f64;
            return cells.into_iter().map(|c| (c, u)).collect();
        }
        cells
            .into_iter()
            .zip(weights)
            .map(|(c, w)| (c, w / total))
            .collect()
    }

    /// Starting state. The mobiles hold the bottom corners facing down;
    /// the fixed case pins the target at the center (no randomness), the
    /// others draw it uniformly from the upper half (i first, then j).
    pub fn initial_state(&self, rng: &mut dyn RngCore) -> TrackingState {
        let g = self.config.grid;
        let target = match self.config.case {
            TrackingCase::Fixed => (g / 2, g / 2),
            TrackingCase::Blind | TrackingCase::Roaming => {
                use rand::Rng;
                let i = rng.random_range(0..g);
                let j = rng.random_range(0..g / 2);
                (i, j)
            }
        };
        TrackingState {
            target,
            first: MobilePose {
                i: 0,
                j: g - 1,
                heading: Heading::Down,
            },
            second: MobilePose {
                i: g - 1,
                j: g - 1,
                heading: Heading::Down,
            },
        }
    }

    /// Advance one step: the target draws its cell from the law of the
    /// previous state, then both mobiles apply their moves.
    pub fn step_state(
        &self,
        state: &TrackingState,
        action: usize,
        rng: &mut dyn RngCore,
    ) -> TrackingState {
        let target = match self.config.case {
            TrackingCase::Fixed => state.target,
            TrackingCase::Blind | TrackingCase::Roaming => {
                let law = self.target_step_distribution(state);
                let weights: Vec<f64> = law.iter().map(|&(_, w)| w).collect();
                law[sample_index(&weights, rng)].0
            }
        };
        let (first_move, second_move) = split_action(action);
        TrackingState {
            target,
            first: self.mobile_move(state.first, first_move),
            second: self.mobile_move(state.second, second_move),
        }
    }

    /// Encode a state as a single index for the [`Environment`] surface.
    pub fn pack(&self, state: &TrackingState) -> usize {
        let g = self.config.grid as usize;
        let mut code = state.target.0 as usize;
        code = code * g + state.target.1 as usize;
        code = code * g + state.first.i as usize;
        code = code * g + state.first.j as usize;
        code = code * 4 + state.first.heading.index();
        code = code * g + state.second.i as usize;
        code = code * g + state.second.j as usize;
        code * 4 + state.second.heading.index()
    }

    pub fn unpack(&self, mut code: usize) -> TrackingState {
        let g = self.config.grid as usize;
        let second_heading = Heading::from_index(code % 4);
        code /= 4;
        let second_j = (code % g) as i32;
        code /= g;
        let second_i = (code % g) as i32;
        code /= g;
        let first_heading = Heading::from_index(code % 4);
        code /= 4;
        let first_j = (code % g) as i32;
        code /= g;
        let first_i = (code % g) as i32;
        code /= g;
        let target_j = (code % g) as i32;
        code /= g;
        let target_i = code as i32;
        TrackingState {
            target: (target_i, target_j),
            first: MobilePose {
                i: first_i,
                j: first_j,
                heading: first_heading,
            },
            second: MobilePose {
                i: second_i,
                j: second_j,
                heading: second_heading,
            },
        }
    }

    /// One frame per step with a `t=` header line.
    pub fn trajectory_frames(&self, episode: &Episode) -> Result<String, RenderError> {
        let states = episode.states.as_ref().ok_or(RenderError::MissingStates)?;
        let mut out = String::new();
        for (idx, &packed) in states.iter().enumerate() {
            let state = self.unpack(packed);
            out.push_str(&format!("t={}\n", idx + 1));
            out.push_str(&self.render_frame(&state));
            out.push('\n');
        }
        Ok(out)
    }

    /// Per-step CSV: poses, action, observation, running score.
    pub fn trajectory_csv(&self, episode: &Episode) -> Result<String, RenderError> {
        let states = episode.states.as_ref().ok_or(RenderError::MissingStates)?;
        let horizon = episode.actions.len();
        let mut out = String::from(
            "t,action,observation,target_i,target_j,first_i,first_j,first_heading,\
             second_i,second_j,second_heading,score\n",
        );
        let mut acc = self.eval_init();
        for t in 1..=horizon {
            let state = self.unpack(states[t - 1]);
            acc = self.eval_step(
                t,
                horizon,
                episode.actions[t - 1],
                episode.observations[t - 1],
                states[t - 1],
                acc,
            );
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                t,
                episode.actions[t - 1],
                episode.observations[t - 1],
                state.target.0,
                state.target.1,
                state.first.i,
                state.first.j,
                state.first.heading.letter(),
                state.second.i,
                state.second.j,
                state.second.heading.letter(),
                acc,
            ));
        }
        Ok(out)
    }
}

impl Environment for TrackingEnv {
    fn num_actions(&self) -> usize {
        16
    }

    fn num_observations(&self) -> usize {
        16
    }

    fn draw_initial(&self, rng: &mut dyn RngCore) -> usize {
        let state = self.initial_state(rng);
        self.pack(&state)
    }

    fn draw_step(&self, prev_state: usize, prev_action: usize, rng: &mut dyn RngCore) -> usize {
        let prev = self.unpack(prev_state);
        self.pack(&self.step_state(&prev, prev_action, rng))
    }

    fn draw_observation(&self, state: usize, rng: &mut dyn RngCore) -> usize {
        let _ = rng; // the observation is a function of the state
        self.observe(&self.unpack(state))
    }

    fn eval_step(
        &self,
        _t: usize,
        _horizon: usize,
        _action: usize,
        _observation: usize,
        state: usize,
        acc: f64,
    ) -> f64 {
        if self.encounter(&self.unpack(state)) {
            acc + 1.0
        } else {
            acc
        }
    }
}
