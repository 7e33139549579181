//! Text format for world models. See docs/formats.md at the repository root
//! for the full grammar; the shape is:
//!
//! ```text
//! worldmodel v1
//! states 2
//! actions 2
//! observations 2
//! initial          # the before-start row comes first
//! 0.5 0.5
//! transition       # one row per (z_prev, x_prev), z_prev outer
//! ...
//! observation      # one row per state
//! ...
//! evaluation terminal_xz
//! ...
//! end
//! ```

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{Evaluation, ModelError, WorldModel};
use crate::textfile::{push_row, Lines, Syntax};

#[derive(Debug, Error)]
pub enum WorldFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("per-step evaluations cannot be written to a world file")]
    UnwritableEvaluation,
}

impl From<Syntax> for WorldFileError {
    fn from(e: Syntax) -> WorldFileError {
        WorldFileError::Syntax {
            line: e.line,
            message: e.message,
        }
    }
}

pub fn parse_world(text: &str) -> Result<WorldModel, WorldFileError> {
    let mut lines = Lines::new(text);
    let (line, header) = lines.keyword("worldmodel")?;
    if header.as_slice() != ["v1"] {
        return Err(WorldFileError::Syntax {
            line,
            message: format!("unsupported version {header:?}, this build reads v1"),
        });
    }
    let (_, states) = lines.counted("states")?;
    let (_, actions) = lines.counted("actions")?;
    let (_, observations) = lines.counted("observations")?;

    lines.keyword("initial")?;
    let initial = lines.rows(1, states)?;
    lines.keyword("transition")?;
    let transition = lines.rows(states * actions, states)?;
    lines.keyword("observation")?;
    let observation = lines.rows(states, observations)?;

    let (line, kind) = lines.keyword("evaluation")?;
    let evaluation = match kind.as_slice() {
        ["terminal_xz"] => {
            Evaluation::terminal_action_state(lines.rows(actions, states)?, actions, states)?
        }
        ["terminal_xyz"] => Evaluation::terminal_full(
            lines.rows(actions * observations, states)?,
            actions,
            observations,
            states,
        )?,
        other => {
            return Err(WorldFileError::Syntax {
                line,
                message: format!("unknown evaluation kind {other:?}"),
            })
        }
    };
    lines.keyword("end")?;

    Ok(WorldModel::new(
        states,
        actions,
        observations,
        initial,
        transition,
        observation,
        evaluation,
    )?)
}

pub fn load_world(path: &Path) -> Result<WorldModel, WorldFileError> {
    let text = fs::read_to_string(path).map_err(|source| WorldFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_world(&text)
}

pub fn write_world(world: &WorldModel) -> Result<String, WorldFileError> {
    let mut out = String::from("worldmodel v1\n");
    let push_counts = |out: &mut String| {
        out.push_str(&format!("states {}\n", world.num_states()));
        out.push_str(&format!("actions {}\n", world.num_actions()));
        out.push_str(&format!("observations {}\n", world.num_observations()));
    };
    push_counts(&mut out);
    out.push_str("initial\n");
    push_row(&mut out, world.state_law(None));
    out.push_str("transition\n");
    for z in 0..world.num_states() {
        for x in 0..world.num_actions() {
            push_row(&mut out, world.state_law(Some((z, x))));
        }
    }
    out.push_str("observation\n");
    for z in 0..world.num_states() {
        push_row(&mut out, world.observation_law(z));
    }
    match world.evaluation() {
        Evaluation::TerminalActionState {
            values, num_states, ..
        } => {
            out.push_str("evaluation terminal_xz\n");
            for row in values.chunks(*num_states) {
                push_row(&mut out, row);
            }
        }
        Evaluation::TerminalFull {
            values, num_states, ..
        } => {
            out.push_str("evaluation terminal_xyz\n");
            for row in values.chunks(*num_states) {
                push_row(&mut out, row);
            }
        }
        Evaluation::PerStep(_) => return Err(WorldFileError::UnwritableEvaluation),
    }
    out.push_str("end\n");
    Ok(out)
}

pub fn save_world(world: &WorldModel, path: &Path) -> Result<(), WorldFileError> {
    let text = write_world(world)?;
    fs::write(path, text).map_err(|source| WorldFileError::Io {
        path: path.display().to_string(),
        source,
    })
}
