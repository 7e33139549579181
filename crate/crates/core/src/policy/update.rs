//! Maximum-likelihood refit from selected episodes.

use thiserror::Error;

use super::{EpisodeShapeError, HhmmStructure, PolicyParams};
use crate::dist::CondTable;
use crate::pomdp::Episode;

#[derive(Debug, Error, PartialEq)]
pub enum MlError {
    #[error("cannot refit from an empty selection")]
    EmptySelection,
    #[error("smoothing must be nonnegative, got {0}")]
    NegativeSmoothing(f64),
    #[error("fallback parameters have a different structure")]
    FallbackMismatch,
    #[error("episode {index}: {source}")]
    Episode {
        index: usize,
        source: EpisodeShapeError,
    },
}

/// Closed-form refit: every table row becomes the smoothed count ratio of
/// its outcomes in the selected episodes,
///
/// ```text
/// row[o] = (count[o] + smoothing) / (total + smoothing * outcomes)
/// ```
///
/// counting the before-start cells of the first step like any others. With
/// zero smoothing, rows never visited by the selection are copied from
/// `fallback`, which in a training loop is the parameter set that generated
/// the episodes.
pub fn ml_update(
    structure: &HhmmStructure,
    selected: &[&Episode],
    smoothing: f64,
    fallback: &PolicyParams,
) -> Result<PolicyParams, MlError> {
    if selected.is_empty() {
        return Err(MlError::EmptySelection);
    }
    if smoothing < 0.0 || !smoothing.is_finite() {
        return Err(MlError::NegativeSmoothing(smoothing));
    }
    if fallback.structure() != structure {
        return Err(MlError::FallbackMismatch);
    }
    for (index, episode) in selected.iter().enumerate() {
        super::check_episode_shape(structure, episode)
            .map_err(|source| MlError::Episode { index, source })?;
    }

    let levels = structure.levels();
    let card = |l: usize| structure.level_cards[l - 1];
    let upper = |l: usize| if l < levels { card(l + 1) } else { 0 };

    let mut action_counts = CondTable::filled(&[card(1)], structure.num_actions, 0.0);
    let mut bottom_counts = CondTable::filled(
        &[structure.num_observations, upper(1)],
        card(1),
        0.0,
    );
    let mut level_counts: Vec<CondTable> = (2..=levels)
        .map(|l| CondTable::filled(&[card(l - 1), upper(l)], card(l), 0.0))
        .collect();

    for episode in selected {
        for t in 1..=episode.actions.len() {
            let memory = &episode.memories[t - 1];
            let prev = |l: usize| {
                if t >= 2 {
                    Some(episode.memories[t - 2].0[l - 1])
                } else {
                    None
                }
            };
            let prev_observation = if t >= 2 {
                Some(episode.observations[t - 2])
            } else {
                None
            };
            for l in 2..=levels {
                let above = if l < levels { Some(memory.0[l]) } else { None };
                let row = level_counts[l - 2].row_index(&[prev(l - 1), above]);
                level_counts[l - 2].row_at_mut(row)[memory.0[l - 1]] += 1.0;
            }
            let above = if levels >= 2 { Some(memory.0[1]) } else { None };
            let row = bottom_counts.row_index(&[prev_observation, above]);
            bottom_counts.row_at_mut(row)[memory.0[0]] += 1.0;
            let row = action_counts.row_index(&[Some(memory.0[0])]);
            action_counts.row_at_mut(row)[episode.actions[t - 1]] += 1.0;
        }
    }

    let action_table = finalize(action_counts, smoothing, fallback.action_table());
    let bottom_table = finalize(bottom_counts, smoothing, fallback.bottom_table());
    let level_tables = level_counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| finalize(c, smoothing, fallback.level_table(i + 2)))
        .collect();

    Ok(PolicyParams::from_tables(
        structure.clone(),
        action_table,
        bottom_table,
        level_tables,
    ))
}

fn finalize(mut counts: CondTable, smoothing: f64, fallback: &CondTable) -> CondTable {
    let outcomes = counts.outcomes();
    for row in 0..counts.num_rows() {
        let r = counts.row_at_mut(row);
        let total: f64 = r.iter().sum();
        if total == 0.0 && smoothing == 0.0 {
            r.copy_from_slice(fallback.row_at(row));
            continue;
        }
        let denom = total + smoothing * outcomes as f64;
        for v in r.iter_mut() {
            *v = (*v + smoothing) / denom;
        }
    }
    counts
}
