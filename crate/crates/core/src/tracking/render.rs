//! Plain-text frames for the pursuit grid.

use thiserror::Error;

use super::{TrackingEnv, TrackingState};

/// Target glyph.
pub const TARGET_GLYPH: char = 'x';
/// First mobile glyph.
pub const FIRST_GLYPH: char = 'B';
/// Second mobile glyph.
pub const SECOND_GLYPH: char = 'C';
/// Empty cell glyph.
pub const EMPTY_GLYPH: char = '.';

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("episode carries no state sequence")]
    MissingStates,
}

impl TrackingEnv {
    /// One line per row, top row first; the target covers the first
    /// mobile, the first mobile covers the second.
    pub fn render_frame(&self, state: &TrackingState) -> String {
        let g = self.grid();
        let mut out = String::with_capacity((g as usize + 1) * g as usize);
        for j in 0..g {
            for i in 0..g {
                let cell = (i, j);
                let glyph = if cell == state.target {
                    TARGET_GLYPH
                } else if cell == (state.first.i, state.first.j) {
                    FIRST_GLYPH
                } else if cell == (state.second.i, state.second.j) {
                    SECOND_GLYPH
                } else {
                    EMPTY_GLYPH
                };
                out.push(glyph);
            }
            out.push('\n');
        }
        out
    }
}

/// Recover the three positions from a frame. `None` when a glyph is
/// missing, which happens whenever pieces overlap.
#[allow(clippy::type_complexity)]
pub fn parse_frame(frame: &str) -> Option<((i32, i32), (i32, i32), (i32, i32))> {
    let mut target = None;
    let mut first = None;
    let mut second = None;
    for (j, line) in frame.lines().enumerate() {
        for (i, glyph) in line.chars().enumerate() {
            let cell = (i as i32, j as i32);
            match glyph {
                TARGET_GLYPH => target = Some(cell),
                FIRST_GLYPH => first = Some(cell),
                SECOND_GLYPH => second = Some(cell),
                _ => {}
            }
        }
    }
    Some((target?, first?, second?))
}
