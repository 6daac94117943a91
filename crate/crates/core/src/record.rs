//! Per-iteration run metrics.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RecordRow {
    pub iter: usize,
    pub wall_time_s: f64,
    /// Full objective `f0(w)`.
    pub objective: f64,
    /// Weighted penalty `Σ_j p_j max(f_j(w), 0)²`.
    pub penalty: f64,
    pub max_violation: f64,
    pub sum_sq_violation: f64,
    pub step_norm_w: f64,
    pub ema_norm_w: f64,
    pub ema_norm_p: f64,
    /// Values of the record's extra columns, same order.
    pub extra: Vec<f64>,
}

/// Time-stamped metrics stream. Rows are strictly increasing in `iter` and
/// nondecreasing in wall time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    extra_columns: Vec<String>,
    rows: Vec<RecordRow>,
}

impl RunRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_columns(extra_columns: Vec<String>) -> Self {
        RunRecord { extra_columns, rows: Vec::new() }
    }

    pub fn extra_columns(&self) -> &[String] {
        &self.extra_columns
    }

    pub fn rows(&self) -> &[RecordRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&RecordRow> {
        self.rows.last()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn push(&mut self, row: RecordRow) -> Result<()> {
        if row.extra.len() != self.extra_columns.len() {
            return Err(Error::Contract(format!(
                "record row has {} extra values for {} extra columns",
                row.extra.len(),
                self.extra_columns.len()
            )));
        }
        if let Some(prev) = self.rows.last() {
            if row.iter <= prev.iter {
                return Err(Error::Contract(format!("record iter {} after {}", row.iter, prev.iter)));
            }
            if row.wall_time_s < prev.wall_time_s {
                return Err(Error::Contract("record wall time went backwards".into()));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// Extra-column values by name, one per row.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.extra_columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.extra[k]).collect())
    }
}
