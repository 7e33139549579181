//! Text format for layered generators, same family as the world files:
//!
//! ```text
//! hhmm v1
//! outputs 2
//! depth 3
//! level 2
//! states 3
//! ending 0 0 1
//! production       # one row per non-ending state, ascending
//! 1 0
//! 0 1
//! transition
//! 0 0.5 0.5
//! 0 0 1
//! level 3
//! ...
//! init
//! 1 0
//! end
//! ```
//!
//! Ending states carry no rows in the file; the reader fills their all
//! zero rows back in.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{HhmmError, HhmmSpec, LevelSpec};
use crate::textfile::{push_row, Lines, Syntax};

#[derive(Debug, Error)]
pub enum HhmmFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Spec(#[from] HhmmError),
}

impl From<Syntax> for HhmmFileError {
    fn from(e: Syntax) -> HhmmFileError {
        HhmmFileError::Syntax {
            line: e.line,
            message: e.message,
        }
    }
}

pub fn parse_hhmm(text: &str) -> Result<HhmmSpec, HhmmFileError> {
    let mut lines = Lines::new(text);
    let (line, header) = lines.keyword("hhmm")?;
    if header.as_slice() != ["v1"] {
        return Err(HhmmFileError::Syntax {
            line,
            message: format!("unsupported version {header:?}, this build reads v1"),
        });
    }
    let (_, outputs) = lines.counted("outputs")?;
    let (depth_line, depth) = lines.counted("depth")?;
    if depth < 2 {
        return Err(HhmmFileError::Syntax {
            line: depth_line,
            message: format!("depth {depth} leaves no state level"),
        });
    }

    let mut levels: Vec<LevelSpec> = Vec::new();
    for d in 2..=depth {
        let (level_line, got) = lines.counted("level")?;
        if got != d {
            return Err(HhmmFileError::Syntax {
                line: level_line,
                message: format!("expected level {d}, found level {got}"),
            });
        }
        let (_, states) = lines.counted("states")?;
        let (mask_line, mask) = lines.keyword("ending")?;
        if mask.len() != states {
            return Err(HhmmFileError::Syntax {
                line: mask_line,
                message: format!("ending mask needs {states} flags, found {}", mask.len()),
            });
        }
        let ending: Vec<bool> = mask
            .iter()
            .map(|tok| match *tok {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(HhmmFileError::Syntax {
                    line: mask_line,
                    message: format!("ending flags are 0 or 1, found {other:?}"),
                }),
            })
            .collect::<Result<_, _>>()?;
        let running = ending.iter().filter(|&&e| !e).count();
        let child_card = if d == 2 {
            outputs
        } else {
            levels[d - 3].states()
        };

        lines.keyword("production")?;
        let packed_prod = lines.rows(running, child_card)?;
        lines.keyword("transition")?;
        let packed_trans = lines.rows(running, states)?;

        // Spread the packed rows over the full tables, zeroes on ending
        // states.
        let mut production = vec![0.0; states * child_card];
        let mut transition = vec![0.0; states * states];
        for (i, q) in (0..states).filter(|&q| !ending[q]).enumerate() {
            production[q * child_card..(q + 1) * child_card]
                .copy_from_slice(&packed_prod[i * child_card..(i + 1) * child_card]);
            transition[q * states..(q + 1) * states]
                .copy_from_slice(&packed_trans[i * states..(i + 1) * states]);
        }
        levels.push(LevelSpec::new(states, ending, production, transition));
    }

    lines.keyword("init")?;
    let init = lines.rows(1, levels.last().expect("depth >= 2").states())?;
    lines.keyword("end")?;
    Ok(HhmmSpec::new(outputs, levels, init)?)
}

pub fn load_hhmm(path: &Path) -> Result<HhmmSpec, HhmmFileError> {
    let text = fs::read_to_string(path).map_err(|source| HhmmFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_hhmm(&text)
}

pub fn write_hhmm(spec: &HhmmSpec) -> String {
    let mut out = String::from("hhmm v1\n");
    out.push_str(&format!("outputs {}\n", spec.outputs()));
    out.push_str(&format!("depth {}\n", spec.depth()));
    for d in 2..=spec.depth() {
        let level = spec.level(d);
        out.push_str(&format!("level {d}\n"));
        out.push_str(&format!("states {}\n", level.states()));
        out.push_str("ending");
        for q in 0..level.states() {
            out.push_str(if level.is_ending(q) { " 1" } else { " 0" });
        }
        out.push('\n');
        out.push_str("production\n");
        for q in level.non_ending_states() {
            push_row(&mut out, level.production_row(q));
        }
        out.push_str("transition\n");
        for q in level.non_ending_states() {
            push_row(&mut out, level.transition_row(q));
        }
    }
    out.push_str("init\n");
    push_row(&mut out, spec.init());
    out.push_str("end\n");
    out
}

pub fn save_hhmm(spec: &HhmmSpec, path: &Path) -> Result<(), HhmmFileError> {
    fs::write(path, write_hhmm(spec)).map_err(|source| HhmmFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{random_hhmm_spec, testspecs};
    use super::*;
    use crate::rng::{episode_rng, StreamSpace};

    #[test]
    fn round_trips_every_fixture() {
        for spec in [
            testspecs::small_flat(),
            testspecs::flat_chain(),
            testspecs::two_branch(),
            testspecs::small_deep(),
        ] {
            let text = write_hhmm(&spec);
            let back = parse_hhmm(&text).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn round_trips_random_specs() {
        for seed in 0..50 {
            let mut rng = episode_rng(320, StreamSpace::Rollout, 0, seed);
            let spec = random_hhmm_spec(&mut rng, 4, 4, 4);
            let back = parse_hhmm(&write_hhmm(&spec)).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn reader_reports_the_offending_line() {
        let text = "\
hhmm v1
outputs 2
depth 2
level 2
states 2
ending 0 1
production
0.9 oops
transition
0 1
init
1 0
end
";
        match parse_hhmm(text) {
            Err(HhmmFileError::Syntax { line, message }) => {
                assert_eq!(line, 8);
                assert!(message.contains("oops"), "{message}");
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn reader_rejects_a_wrong_level_number() {
        let text = "\
hhmm v1
outputs 1
depth 2
level 3
";
        assert!(matches!(
            parse_hhmm(text),
            Err(HhmmFileError::Syntax { .. })
        ));
    }

    #[test]
    fn broken_laws_surface_as_model_errors() {
        // Rows parse fine but the law fails validation.
        let text = "\
hhmm v1
outputs 2
depth 2
level 2
states 2
ending 0 1
production
0.9 0.2
transition
0 1
init
1 0
end
";
        assert!(matches!(
            parse_hhmm(text),
            Err(HhmmFileError::Spec(HhmmError::BadRow {
                level: 2,
                table: "production",
                state: 0,
                ..
            }))
        ));
    }

    #[test]
    fn comments_and_spacing_are_free() {
        let spec = testspecs::two_branch();
        let mut text = String::from("# layered generator, two branches\n\n");
        for line in write_hhmm(&spec).lines() {
            text.push_str(line);
            text.push_str("   # trailing note\n\n");
        }
        assert_eq!(parse_hhmm(&text).unwrap(), spec);
    }
}
