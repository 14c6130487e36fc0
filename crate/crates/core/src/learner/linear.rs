//! Ordinary least squares on a treatment-coded design matrix.

use super::design::Design;
use super::linalg::solve_spd;
use crate::error::{Error, Result};
use crate::table::FeatureTable;

#[derive(Clone, Debug)]
pub struct LinearModel {
    pub(crate) design: Design,
    /// Coefficients aligned with the design terms (intercept first).
    pub coefficients: Vec<f64>,
}

/// Accumulate the normal equations X'X and X'y in one pass.
fn normal_equations(x: &[f64], y: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xtx = vec![0.0; d * d];
    let mut xty = vec![0.0; d];
    for (i, &yi) in y.iter().enumerate() {
        let row = &x[i * d..(i + 1) * d];
        for a in 0..d {
            xty[a] += row[a] * yi;
            for b in a..d {
                xtx[a * d + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            xtx[a * d + b] = xtx[b * d + a];
        }
    }
    (xtx, xty)
}

/// Solve the normal equations; on a singular design, retry once with a
/// ridge of 1e-8 added to every diagonal entry and record a warning.
pub(crate) fn solve_least_squares(
    x: &[f64],
    y: &[f64],
    d: usize,
    warnings: &mut Vec<String>,
) -> Result<Vec<f64>> {
    let (mut xtx, xty) = normal_equations(x, y, d);
    if let Some(beta) = solve_spd(&xtx, &xty, d) {
        return Ok(beta);
    }
    warnings.push("singular design matrix; ridge 1e-8 applied to the normal equations".into());
    for a in 0..d {
        xtx[a * d + a] += 1e-8;
    }
    solve_spd(&xtx, &xty, d)
        .ok_or_else(|| Error::Singular("normal equations remain singular after ridge".into()))
}

pub(crate) fn fit(
    table: &FeatureTable,
    y: &[f64],
    warnings: &mut Vec<String>,
) -> Result<LinearModel> {
    let design = Design::from_schema(table.schema());
    let d = design.width();
    let x = design.matrix(table);
    let coefficients = solve_least_squares(&x, y, d, warnings)?;
    Ok(LinearModel {
        design,
        coefficients,
    })
}

impl LinearModel {
    pub(crate) fn predict_response(&self, table: &FeatureTable) -> Vec<f64> {
        let d = self.design.width();
        let mut row = vec![0.0; d];
        let mut out = Vec::with_capacity(table.n_rows());
        for i in 0..table.n_rows() {
            self.design.fill_row(table, i, &mut row);
            out.push(row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum());
        }
        out
    }

    /// Term names aligned with [`LinearModel::coefficients`].
    pub fn term_names(&self, table_schema: &[crate::table::FeatureSchema]) -> Vec<String> {
        self.design.term_names(table_schema)
    }
}
