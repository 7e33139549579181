//! Conditional probability tables and categorical sampling.
//!
//! Every conditioning axis reserves slot 0 for the before-start symbol, so a
//! table conditioned on a symbol of cardinality `c` has `c + 1` rows along
//! that axis. Row 0 holds the law used at the first step, where nothing has
//! been observed yet. Outcome symbols are plain 0-based indices and never
//! include the reserved slot.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for probability rows loaded from model files.
pub const MODEL_ROW_TOL: f64 = 1e-12;
/// Tolerance for probability rows loaded from policy documents.
pub const POLICY_ROW_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("table data has {got} entries, expected {expected}")]
    BadShape { expected: usize, got: usize },
    #[error("row {row} sums to {sum} (tolerance {tol})")]
    BadRow { row: usize, sum: f64, tol: f64 },
    #[error("row {row} has negative entry {value} at column {column}")]
    NegativeEntry { row: usize, column: usize, value: f64 },
}

/// Draw an index from a probability row. The row must carry positive mass.
pub fn sample_index(probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let u: f64 = rand::Rng::random(rng);
    let mut cum = 0.0;
    let mut last = usize::MAX;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last = i;
            cum += p;
            if u < cum {
                return i;
            }
        }
    }
    // Rounding can leave cum marginally below 1; fall back to the last
    // positive outcome.
    assert!(last != usize::MAX, "sampling from an all-zero row");
    last
}

/// Dense conditional distribution table.
///
/// `ctx_cards` lists the real cardinality of each conditioning axis; storage
/// adds the reserved slot, so the row count is the product of `card + 1`
/// over axes. An axis with cardinality 0 is legal and one slot wide: it can
/// only ever hold the before-start symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondTable {
    ctx_cards: Vec<usize>,
    outcomes: usize,
    rows: Vec<f64>,
}

impl CondTable {
    pub fn uniform(ctx_cards: &[usize], outcomes: usize) -> Self {
        assert!(outcomes >= 1, "a table needs at least one outcome");
        let n = Self::row_count(ctx_cards);
        CondTable {
            ctx_cards: ctx_cards.to_vec(),
            outcomes,
            rows: vec![1.0 / outcomes as f64; n * outcomes],
        }
    }

    /// Table of a constant value, used as a count accumulator. Not a
    /// distribution until the rows are rewritten.
    pub(crate) fn filled(ctx_cards: &[usize], outcomes: usize, value: f64) -> Self {
        assert!(outcomes >= 1, "a table needs at least one outcome");
        let n = Self::row_count(ctx_cards);
        CondTable {
            ctx_cards: ctx_cards.to_vec(),
            outcomes,
            rows: vec![value; n * outcomes],
        }
    }

    /// Build from flat row-major data (reserved slots included) and validate
    /// every row against `tol`.
    pub fn from_rows(
        ctx_cards: &[usize],
        outcomes: usize,
        rows: Vec<f64>,
        tol: f64,
    ) -> Result<Self, TableError> {
        assert!(outcomes >= 1, "a table needs at least one outcome");
        let expected = Self::row_count(ctx_cards) * outcomes;
        if rows.len() != expected {
            return Err(TableError::BadShape {
                expected,
                got: rows.len(),
            });
        }
        let table = CondTable {
            ctx_cards: ctx_cards.to_vec(),
            outcomes,
            rows,
        };
        table.check_rows(tol)?;
        Ok(table)
    }

    fn row_count(ctx_cards: &[usize]) -> usize {
        ctx_cards.iter().map(|&c| c + 1).product()
    }

    pub fn ctx_cards(&self) -> &[usize] {
        &self.ctx_cards
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn num_rows(&self) -> usize {
        Self::row_count(&self.ctx_cards)
    }

    /// Flat row index for a conditioning tuple. `None` selects the reserved
    /// before-start slot of an axis.
    pub fn row_index(&self, ctx: &[Option<usize>]) -> usize {
        assert_eq!(ctx.len(), self.ctx_cards.len(), "conditioning rank mismatch");
        let mut idx = 0;
        for (axis, slot) in ctx.iter().enumerate() {
            let card = self.ctx_cards[axis];
            let s = match slot {
                None => 0,
                Some(v) => {
                    assert!(*v < card, "conditioning symbol {v} out of range {card}");
                    v + 1
                }
            };
            idx = idx * (card + 1) + s;
        }
        idx
    }

    pub fn row(&self, ctx: &[Option<usize>]) -> &[f64] {
        let i = self.row_index(ctx) * self.outcomes;
        &self.rows[i..i + self.outcomes]
    }

    pub fn row_at(&self, row: usize) -> &[f64] {
        let i = row * self.outcomes;
        &self.rows[i..i + self.outcomes]
    }

    pub fn row_at_mut(&mut self, row: usize) -> &mut [f64] {
        let i = row * self.outcomes;
        &mut self.rows[i..i + self.outcomes]
    }

    pub fn prob(&self, ctx: &[Option<usize>], outcome: usize) -> f64 {
        self.row(ctx)[outcome]
    }

    pub fn sample(&self, ctx: &[Option<usize>], rng: &mut dyn RngCore) -> usize {
        sample_index(self.row(ctx), rng)
    }

    /// Verify that every row is a probability distribution within `tol`.
    pub fn check_rows(&self, tol: f64) -> Result<(), TableError> {
        for row in 0..self.num_rows() {
            let r = self.row_at(row);
            let mut sum = 0.0;
            for (column, &value) in r.iter().enumerate() {
                if value < 0.0 || !value.is_finite() {
                    return Err(TableError::NegativeEntry { row, column, value });
                }
                sum += value;
            }
            if (sum - 1.0).abs() > tol {
                return Err(TableError::BadRow { row, sum, tol });
            }
        }
        Ok(())
    }

    /// Rows as nested vectors, reserved slots included. Used by document
    /// serializers so the on-disk layout is explicit.
    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.num_rows()).map(|r| self.row_at(r).to_vec()).collect()
    }

    pub fn from_nested(
        ctx_cards: &[usize],
        outcomes: usize,
        nested: &[Vec<f64>],
        tol: f64,
    ) -> Result<Self, TableError> {
        let expected_rows = Self::row_count(ctx_cards);
        if nested.len() != expected_rows {
            return Err(TableError::BadShape {
                expected: expected_rows * outcomes,
                got: nested.len() * outcomes.max(1),
            });
        }
        for (i, r) in nested.iter().enumerate() {
            if r.len() != outcomes {
                return Err(TableError::BadShape {
                    expected: outcomes,
                    got: r.len(),
                }
                .at_row(i));
            }
        }
        let rows = nested.concat();
        Self::from_rows(ctx_cards, outcomes, rows, tol)
    }
}

impl TableError {
    /// Rewrite a shape error so it points at a specific row; other variants
    /// already carry their location.
    fn at_row(self, row: usize) -> TableError {
        match self {
            TableError::BadShape { expected, got } => TableError::BadRow {
                row,
                sum: got as f64,
                tol: expected as f64,
            },
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_rows_normalize() {
        let t = CondTable::uniform(&[3, 0], 4);
        assert_eq!(t.num_rows(), 4);
        t.check_rows(1e-15).unwrap();
        assert_eq!(t.prob(&[Some(2), None], 3), 0.25);
    }

    #[test]
    fn row_indexing_reserves_slot_zero() {
        let t = CondTable::uniform(&[2, 3], 2);
        // Axis widths 3 and 4; reserved slots map to 0.
        assert_eq!(t.row_index(&[None, None]), 0);
        assert_eq!(t.row_index(&[None, Some(0)]), 1);
        assert_eq!(t.row_index(&[Some(0), None]), 4);
        assert_eq!(t.row_index(&[Some(1), Some(2)]), 2 * 4 + 3);
    }

    #[test]
    fn from_rows_rejects_bad_sum() {
        let err = CondTable::from_rows(&[0], 2, vec![0.5, 0.4], 1e-9).unwrap_err();
        assert_eq!(
            err,
            TableError::BadRow {
                row: 0,
                sum: 0.9,
                tol: 1e-9
            }
        );
    }

    #[test]
    fn sampling_matches_weights_roughly() {
        let t = CondTable::from_rows(&[0], 2, vec![0.25, 0.75], 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut ones = 0;
        for _ in 0..n {
            if t.sample(&[None], &mut rng) == 1 {
                ones += 1;
            }
        }
        let freq = ones as f64 / n as f64;
        // 3 standard errors of a Bernoulli(0.75) at n = 1e5.
        assert!((freq - 0.75).abs() < 3.0 * (0.75f64 * 0.25 / n as f64).sqrt());
    }

    #[test]
    fn sampling_is_reproducible() {
        let t = CondTable::uniform(&[1], 5);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| t.sample(&[Some(0)], &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }
}
