//! Binary logistic regression fitted by iteratively reweighted least squares.

use super::design::Design;
use super::linalg::solve_spd;
use crate::error::{Error, Result};
use crate::table::FeatureTable;

/// Linear predictors are clamped to this magnitude; beyond it the sigmoid
/// is 1 within 1e-13 and the weights underflow anyway.
const ETA_CAP: f64 = 30.0;
const WEIGHT_FLOOR: f64 = 1e-10;
const TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct LogisticModel {
    pub(crate) design: Design,
    /// Coefficients for the log-odds of the second class level.
    pub coefficients: Vec<f64>,
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta.clamp(-ETA_CAP, ETA_CAP)).exp())
}

pub(crate) fn fit(
    table: &FeatureTable,
    codes: &[u32],
    max_iter: usize,
    warnings: &mut Vec<String>,
) -> Result<LogisticModel> {
    let design = Design::from_schema(table.schema());
    let d = design.width();
    let n = table.n_rows();
    let x = design.matrix(table);
    let y: Vec<f64> = codes.iter().map(|&c| if c == 1 { 1.0 } else { 0.0 }).collect();

    let mut beta = vec![0.0; d];
    let mut eta: Vec<f64> = vec![0.0; n];
    let mut converged = false;
    let mut capped = false;
    for _ in 0..max_iter {
        // Weighted normal equations for the working response
        // z = eta + (y - p) / w with w = p (1 - p).
        let mut xtwx = vec![0.0; d * d];
        let mut xtwz = vec![0.0; d];
        for i in 0..n {
            if eta[i].abs() >= ETA_CAP {
                capped = true;
            }
            let p = sigmoid(eta[i]);
            let w = (p * (1.0 - p)).max(WEIGHT_FLOOR);
            let z = eta[i] + (y[i] - p) / w;
            let row = &x[i * d..(i + 1) * d];
            for a in 0..d {
                xtwz[a] += w * row[a] * z;
                for b in a..d {
                    xtwx[a * d + b] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                xtwx[a * d + b] = xtwx[b * d + a];
            }
        }
        let new_beta = match solve_spd(&xtwx, &xtwz, d) {
            Some(b) => b,
            None => {
                warnings.push(
                    "singular weighted design; ridge 1e-8 applied to the IRLS step".into(),
                );
                for a in 0..d {
                    xtwx[a * d + a] += 1e-8;
                }
                solve_spd(&xtwx, &xtwz, d).ok_or_else(|| {
                    Error::Singular("IRLS normal equations remain singular after ridge".into())
                })?
            }
        };
        let delta = new_beta
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        beta = new_beta;
        for i in 0..n {
            eta[i] = x[i * d..(i + 1) * d]
                .iter()
                .zip(&beta)
                .map(|(a, b)| a * b)
                .sum();
        }
        if delta < TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!("IRLS did not converge in {max_iter} iterations"));
    }
    if capped || eta.iter().any(|e| e.abs() >= ETA_CAP) {
        warnings.push(
            "complete or quasi-complete separation detected; fitted probabilities capped".into(),
        );
    }
    Ok(LogisticModel {
        design,
        coefficients: beta,
    })
}

impl LogisticModel {
    /// Row-major probabilities over the two class levels.
    pub(crate) fn predict_probs(&self, table: &FeatureTable) -> Vec<f64> {
        let d = self.design.width();
        let mut row = vec![0.0; d];
        let mut out = Vec::with_capacity(table.n_rows() * 2);
        for i in 0..table.n_rows() {
            self.design.fill_row(table, i, &mut row);
            let eta: f64 = row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum();
            let p = sigmoid(eta);
            out.push(1.0 - p);
            out.push(p);
        }
        out
    }
}
