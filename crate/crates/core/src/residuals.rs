//! Held-out residuals pooled across resampling iterations.
//!
//! Regression residuals are `y - y_hat`. Probabilistic classifiers yield
//! `p - onehot(y)`: just the positive-class component for binary tasks,
//! all class components for multiclass. Classifiers that only emit hard
//! labels get a pooled confusion matrix instead of quantiles.

use crate::data::{TaskType, Truth};
use crate::error::{Error, Result};
use crate::learner::Prediction;
use crate::metrics::{confusion, ConfusionMatrix};
use crate::resampling::ResampleResult;
use crate::stats;

/// Residuals of one prediction: a numeric vector or a confusion matrix.
#[derive(Clone, Debug)]
pub enum Residuals {
    Values(Vec<f64>),
    Confusion(ConfusionMatrix),
}

pub fn residuals(
    prediction: &Prediction,
    truth: &Truth,
    positive: Option<usize>,
) -> Result<Residuals> {
    if prediction.n() != truth.len() {
        return Err(Error::LengthMismatch {
            prediction: prediction.n(),
            truth: truth.len(),
        });
    }
    if let (Some(pred), Truth::Values(y)) = (prediction.response.as_ref(), truth) {
        return Ok(Residuals::Values(
            y.iter().zip(pred).map(|(t, p)| t - p).collect(),
        ));
    }
    if let (Some(probs), Truth::Classes(codes)) = (prediction.probabilities.as_ref(), truth) {
        let k = prediction.n_classes();
        let values = match positive {
            // Binary: one residual per row, on the positive class.
            Some(pos) if k == 2 => codes
                .iter()
                .enumerate()
                .map(|(i, &y)| {
                    let t = if y as usize == pos { 1.0 } else { 0.0 };
                    probs[i * k + pos] - t
                })
                .collect(),
            // Multiclass: the whole p - onehot row, flattened.
            _ => codes
                .iter()
                .enumerate()
                .flat_map(|(i, &y)| {
                    (0..k).map(move |c| {
                        let t = if c == y as usize { 1.0 } else { 0.0 };
                        probs[i * k + c] - t
                    })
                })
                .collect(),
        };
        return Ok(Residuals::Values(values));
    }
    confusion(prediction, truth).map(Residuals::Confusion)
}

/// Five-number summary of pooled residuals.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct FiveNum {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

pub fn five_number(values: &[f64]) -> FiveNum {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    FiveNum {
        min: stats::quantile_type7(&sorted, 0.0),
        q25: stats::quantile_type7(&sorted, 0.25),
        median: stats::quantile_type7(&sorted, 0.5),
        q75: stats::quantile_type7(&sorted, 0.75),
        max: stats::quantile_type7(&sorted, 1.0),
    }
}

#[derive(Clone, Debug)]
pub enum ResidualSummary {
    Quantiles(FiveNum),
    Confusion(ConfusionMatrix),
}

/// Pool residuals over every iteration, then summarize: quantiles for
/// numeric residuals, a summed matrix for the confusion case.
pub fn summarize_residuals(rr: &ResampleResult) -> Result<ResidualSummary> {
    let positive = rr.task.positive_index();
    let mut pooled_values: Vec<f64> = Vec::new();
    let mut pooled_matrix: Option<ConfusionMatrix> = None;
    for it in &rr.iterations {
        let truth = rr.task.truth(&it.test);
        match residuals(&it.prediction, &truth, positive)? {
            Residuals::Values(mut v) => pooled_values.append(&mut v),
            Residuals::Confusion(m) => match pooled_matrix.as_mut() {
                Some(acc) => acc.add(&m),
                None => pooled_matrix = Some(m),
            },
        }
    }
    match pooled_matrix {
        Some(m) => Ok(ResidualSummary::Confusion(m)),
        None => Ok(ResidualSummary::Quantiles(five_number(&pooled_values))),
    }
}

/// Residual kind shown in reports.
pub fn residual_kind(task_type: TaskType, probabilistic: bool) -> &'static str {
    match (task_type, probabilistic) {
        (TaskType::Regression, _) => "response",
        (_, true) => "probability",
        (_, false) => "confusion",
    }
}
