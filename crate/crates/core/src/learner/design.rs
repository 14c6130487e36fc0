//! Design matrices for the linear and logistic learners.
//!
//! Numeric features enter as-is; categorical features are treatment coded
//! (one indicator per non-reference level, the first level being the
//! reference). An intercept column of ones comes first.

use crate::data::ColumnKind;
use crate::table::{FeatureSchema, FeatureTable};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Term {
    Intercept,
    Numeric { feature: usize },
    /// Indicator for `feature == level` (level index within the schema).
    Indicator { feature: usize, level: u32 },
}

/// Mapping from a feature schema to design matrix columns.
#[derive(Clone, Debug)]
pub struct Design {
    pub(crate) terms: Vec<Term>,
}

impl Design {
    pub(crate) fn from_schema(schema: &[FeatureSchema]) -> Design {
        let mut terms = vec![Term::Intercept];
        for (j, feat) in schema.iter().enumerate() {
            match feat.kind {
                ColumnKind::Numeric => terms.push(Term::Numeric { feature: j }),
                ColumnKind::Categorical => {
                    for level in 1..feat.n_levels() as u32 {
                        terms.push(Term::Indicator { feature: j, level });
                    }
                }
            }
        }
        Design { terms }
    }

    pub(crate) fn width(&self) -> usize {
        self.terms.len()
    }

    /// Human-readable term names, aligned with coefficient order.
    pub fn term_names(&self, schema: &[FeatureSchema]) -> Vec<String> {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Intercept => "(intercept)".to_string(),
                Term::Numeric { feature } => schema[*feature].name.clone(),
                Term::Indicator { feature, level } => format!(
                    "{}={}",
                    schema[*feature].name,
                    schema[*feature].levels[*level as usize]
                ),
            })
            .collect()
    }

    /// Fill one design row for table row `i`.
    pub(crate) fn fill_row(&self, table: &FeatureTable, i: usize, out: &mut [f64]) {
        for (c, term) in self.terms.iter().enumerate() {
            out[c] = match term {
                Term::Intercept => 1.0,
                Term::Numeric { feature } => table.get(i, *feature),
                Term::Indicator { feature, level } => {
                    if table.get(i, *feature) as u32 == *level {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
        }
    }

    /// Dense row-major design matrix for the whole table.
    pub(crate) fn matrix(&self, table: &FeatureTable) -> Vec<f64> {
        let d = self.width();
        let mut x = vec![0.0; table.n_rows() * d];
        for i in 0..table.n_rows() {
            self.fill_row(table, i, &mut x[i * d..(i + 1) * d]);
        }
        x
    }
}
