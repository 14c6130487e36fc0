//! Dense feature matrix shared by learners and effect estimators.
//!
//! A [`FeatureTable`] is a row-major `n x p` matrix of `f64`. Categorical
//! cells hold level codes cast to `f64`, with the level table kept in the
//! schema. Effect estimators overwrite one column at a time in a scratch
//! copy, so mutation is cheap and allocation-free.

use std::sync::Arc;

use crate::data::{ColumnData, ColumnKind, Frame, Task};
use crate::error::{Error, Result};

/// Shape of one feature column as seen at fit time.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Level table for categorical features; empty for numeric ones.
    pub levels: Vec<String>,
}

impl FeatureSchema {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }
}

/// Row-major feature matrix with its schema.
#[derive(Clone, Debug)]
pub struct FeatureTable {
    schema: Arc<Vec<FeatureSchema>>,
    n_rows: usize,
    values: Vec<f64>,
}

/// Build the schema for a task's feature columns, in feature order.
pub fn task_schema(task: &Task) -> Vec<FeatureSchema> {
    task.feature_names
        .iter()
        .map(|name| {
            let col = task.frame().column(name).expect("feature column");
            FeatureSchema {
                name: name.clone(),
                kind: col.kind(),
                levels: col.levels().map(<[String]>::to_vec).unwrap_or_default(),
            }
        })
        .collect()
}

impl FeatureTable {
    /// Gather `rows` of the task's feature columns.
    pub fn from_task(task: &Task, rows: &[usize]) -> FeatureTable {
        let schema = Arc::new(task_schema(task));
        Self::gather(task.frame(), rows, schema).expect("task features match their own schema")
    }

    /// Gather `rows` of `frame` against an existing schema, remapping
    /// categorical codes by level name. Unknown columns, kind mismatches,
    /// and unseen levels are errors.
    pub fn from_frame(
        frame: &Frame,
        rows: &[usize],
        schema: Arc<Vec<FeatureSchema>>,
    ) -> Result<FeatureTable> {
        Self::gather(frame, rows, schema)
    }

    fn gather(frame: &Frame, rows: &[usize], schema: Arc<Vec<FeatureSchema>>) -> Result<FeatureTable> {
        let p = schema.len();
        let mut values = vec![0.0; rows.len() * p];
        for (j, feat) in schema.iter().enumerate() {
            let col = frame
                .column(&feat.name)
                .ok_or_else(|| Error::MissingFeature(feat.name.clone()))?;
            match (&col.data, feat.kind) {
                (ColumnData::Numeric(v), ColumnKind::Numeric) => {
                    for (i, &r) in rows.iter().enumerate() {
                        values[i * p + j] = v[r];
                    }
                }
                (ColumnData::Categorical { codes, levels }, ColumnKind::Categorical) => {
                    // Map the frame's codes into the schema's level order.
                    let remap: Vec<Option<u32>> = levels
                        .iter()
                        .map(|l| feat.levels.iter().position(|s| s == l).map(|i| i as u32))
                        .collect();
                    for (i, &r) in rows.iter().enumerate() {
                        let code = codes[r] as usize;
                        match remap[code] {
                            Some(mapped) => values[i * p + j] = mapped as f64,
                            None => {
                                return Err(Error::UnseenLevel {
                                    feature: feat.name.clone(),
                                    level: levels[code].clone(),
                                })
                            }
                        }
                    }
                }
                (_, expected) => {
                    return Err(Error::FeatureKindMismatch {
                        feature: feat.name.clone(),
                        expected: expected.name(),
                        got: col.kind().name(),
                    })
                }
            }
        }
        Ok(FeatureTable {
            schema,
            n_rows: rows.len(),
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn shared_schema(&self) -> Arc<Vec<FeatureSchema>> {
        Arc::clone(&self.schema)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|f| f.name == name)
    }

    #[inline]
    pub fn get(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.schema.len() + feature]
    }

    #[inline]
    pub fn set(&mut self, row: usize, feature: usize, value: f64) {
        self.values[row * self.schema.len() + feature] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        let p = self.schema.len();
        &self.values[row * p..(row + 1) * p]
    }

    /// Copy of one feature column.
    pub fn column(&self, feature: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, feature)).collect()
    }

    /// Overwrite one feature column with a constant.
    pub fn fill_column(&mut self, feature: usize, value: f64) {
        for i in 0..self.n_rows {
            self.set(i, feature, value);
        }
    }

    /// Overwrite one feature column from a slice.
    pub fn set_column(&mut self, feature: usize, values: &[f64]) {
        assert_eq!(values.len(), self.n_rows, "column length");
        for (i, &v) in values.iter().enumerate() {
            self.set(i, feature, v);
        }
    }

    /// Copy of the table restricted to the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> FeatureTable {
        let p = self.schema.len();
        let mut values = Vec::with_capacity(rows.len() * p);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        FeatureTable {
            schema: Arc::clone(&self.schema),
            n_rows: rows.len(),
            values,
        }
    }
}

/// Anything that maps a feature table to one prediction per row.
///
/// Fitted models adapt to this through [`crate::learner::ModelOutput`];
/// closures implement it directly, which keeps effect estimators testable
/// against analytic functions.
pub trait TableModel: Sync {
    fn predict_table(&self, table: &FeatureTable) -> Vec<f64>;
}

impl<F> TableModel for F
where
    F: Fn(&FeatureTable) -> Vec<f64> + Sync,
{
    fn predict_table(&self, table: &FeatureTable) -> Vec<f64> {
        self(table)
    }
}
