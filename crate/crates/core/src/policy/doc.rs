//! Versioned policy document format.
//!
//! A document is JSON with an explicit schema tag. Tables are written row
//! by row with the reserved before-start rows included, so the file shows
//! exactly what the sampler will read. Probabilities survive a round trip
//! bit for bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{HhmmStructure, PolicyParams, StructureError};
use crate::dist::{CondTable, TableError, POLICY_ROW_TOL};

pub const POLICY_SCHEMA: &str = "hhmm-policy-v1";

#[derive(Debug, Error)]
pub enum PolicyDocError {
    #[error("not a policy document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema is {found:?}, this build reads {expected:?}")]
    Schema { found: String, expected: &'static str },
    #[error("structure: {0}")]
    Structure(#[from] StructureError),
    #[error("table {table}: {source}")]
    Table { table: String, source: TableError },
}

#[derive(Serialize, Deserialize)]
struct PolicyDocument {
    schema: String,
    structure: HhmmStructure,
    /// Action law rows: before-start slot of the bottom level first.
    action_table: Vec<Vec<f64>>,
    /// Bottom level rows: (previous observation, level 2) row-major.
    bottom_table: Vec<Vec<f64>>,
    /// Levels 2 and up: (level below at previous step, level above) rows.
    level_tables: Vec<Vec<Vec<f64>>>,
}

pub fn serialize_policy(params: &PolicyParams) -> String {
    let doc = PolicyDocument {
        schema: POLICY_SCHEMA.to_string(),
        structure: params.structure().clone(),
        action_table: params.action_table().to_nested(),
        bottom_table: params.bottom_table().to_nested(),
        level_tables: params.level_tables().iter().map(|t| t.to_nested()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

pub fn deserialize_policy(text: &str) -> Result<PolicyParams, PolicyDocError> {
    let doc: PolicyDocument = serde_json::from_str(text)?;
    if doc.schema != POLICY_SCHEMA {
        return Err(PolicyDocError::Schema {
            found: doc.schema,
            expected: POLICY_SCHEMA,
        });
    }
    let structure = HhmmStructure::new(
        doc.structure.level_cards.clone(),
        doc.structure.num_actions,
        doc.structure.num_observations,
    )?;
    let levels = structure.levels();
    let card = |l: usize| structure.level_cards[l - 1];
    let upper = |l: usize| if l < levels { card(l + 1) } else { 0 };

    let action_table = CondTable::from_nested(
        &[card(1)],
        structure.num_actions,
        &doc.action_table,
        POLICY_ROW_TOL,
    )
    .map_err(|source| PolicyDocError::Table {
        table: "action".into(),
        source,
    })?;
    let bottom_table = CondTable::from_nested(
        &[structure.num_observations, upper(1)],
        card(1),
        &doc.bottom_table,
        POLICY_ROW_TOL,
    )
    .map_err(|source| PolicyDocError::Table {
        table: "bottom".into(),
        source,
    })?;
    if doc.level_tables.len() != levels - 1 {
        return Err(PolicyDocError::Table {
            table: "levels".into(),
            source: TableError::BadShape {
                expected: levels - 1,
                got: doc.level_tables.len(),
            },
        });
    }
    let mut level_tables = Vec::with_capacity(levels.saturating_sub(1));
    for (i, nested) in doc.level_tables.iter().enumerate() {
        let l = i + 2;
        let table = CondTable::from_nested(&[card(l - 1), upper(l)], card(l), nested, POLICY_ROW_TOL)
            .map_err(|source| PolicyDocError::Table {
                table: format!("level {l}"),
                source,
            })?;
        level_tables.push(table);
    }
    Ok(PolicyParams::from_tables(
        structure,
        action_table,
        bottom_table,
        level_tables,
    ))
}
