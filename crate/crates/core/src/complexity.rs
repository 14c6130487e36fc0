//! Per-fold model complexity: sparsity (features with a detectable
//! effect) and interaction strength (IAS).
//!
//! Both reuse the fold's ALE curves. Sparsity counts features whose ALE
//! range exceeds a threshold relative to the spread of the held-out
//! predictions. Interaction strength compares the model against its
//! additive reconstruction, the main-effect model built from the
//! accumulated curves: 0 means the model is additive in its features,
//! values near 1 mean interactions carry the signal.

use serde::Serialize;

use crate::effects::EffectCurve;
use crate::stats;
use crate::table::FeatureTable;

/// Fraction of the held-out prediction range below which an ALE curve
/// counts as flat.
pub const SPARSITY_EPSILON: f64 = 1e-5;

#[derive(Clone, Debug, Serialize)]
pub struct ComplexityRecord {
    pub fold: usize,
    pub sparsity: usize,
    pub interaction_strength: f64,
}

/// Count the features whose ALE curve moves: range greater than
/// `SPARSITY_EPSILON` times the prediction range. A model with constant
/// predictions uses no features.
pub fn sparsity(curves: &[&EffectCurve], prediction_range: f64) -> usize {
    if prediction_range <= 0.0 {
        return 0;
    }
    let epsilon = SPARSITY_EPSILON * prediction_range;
    curves.iter().filter(|c| c.range() > epsilon).count()
}

/// Interaction strength on one fold and output column.
///
/// The main-effect model is f0 plus the sum of per-feature ALE values at
/// each row's own feature values; IAS is the squared reconstruction
/// error scaled by the squared deviation of the predictions from their
/// mean. A zero denominator (constant predictions) yields 0 by
/// convention. The value is not clamped; callers flag results above 1.
pub fn interaction_strength(
    predictions: &[f64],
    table: &FeatureTable,
    curves: &[&EffectCurve],
) -> f64 {
    let n = predictions.len();
    if n == 0 {
        return 0.0;
    }
    // Constant predictions: defined as 0 rather than 0/0. Checked on the
    // raw values because the mean of n identical floats can differ from
    // them in the last bit.
    let lo = predictions.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = predictions.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if lo == hi {
        return 0.0;
    }
    let f0 = stats::mean(predictions);
    let columns: Vec<(usize, &EffectCurve)> = curves
        .iter()
        .map(|c| {
            let j = table
                .feature_index(c.feature())
                .expect("curve feature is in the table schema");
            (j, *c)
        })
        .collect();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for i in 0..n {
        let mut main = f0;
        for &(j, curve) in &columns {
            main += curve.value_at(table.get(i, j));
        }
        numerator += (predictions[i] - main).powi(2);
        denominator += (predictions[i] - f0).powi(2);
    }
    if denominator == 0.0 {
        0.0
    } else {
        numerator / denominator
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexityAggregate {
    pub sparsity_mean: f64,
    pub sparsity_sd: f64,
    pub interaction_mean: f64,
    pub interaction_sd: f64,
    /// True when only one fold contributed, making the sds a convention
    /// rather than an estimate.
    pub single_fold: bool,
    pub per_fold: Vec<ComplexityRecord>,
    pub warnings: Vec<String>,
}

/// Mean and sample sd of both complexity measures across folds. A single
/// fold reports sd 0 and sets the flag; interaction strengths above 1
/// are kept as-is but warned about.
pub fn aggregate_complexity(records: &[ComplexityRecord]) -> ComplexityAggregate {
    let sparsities: Vec<f64> = records.iter().map(|r| r.sparsity as f64).collect();
    let strengths: Vec<f64> = records.iter().map(|r| r.interaction_strength).collect();
    let mut warnings = Vec::new();
    for r in records {
        if r.interaction_strength > 1.0 {
            warnings.push(format!(
                "fold {}: interaction strength {} exceeds 1",
                r.fold, r.interaction_strength
            ));
        }
    }
    ComplexityAggregate {
        sparsity_mean: stats::mean(&sparsities),
        sparsity_sd: stats::sample_sd(&sparsities).unwrap_or(0.0),
        interaction_mean: stats::mean(&strengths),
        interaction_sd: stats::sample_sd(&strengths).unwrap_or(0.0),
        single_fold: records.len() < 2,
        per_fold: records.to_vec(),
        warnings,
    }
}
