//! Baseline learner that ignores all features.
//!
//! Regression predicts the training mean; classification predicts the
//! training class frequencies.

use crate::data::Truth;
use crate::table::FeatureTable;

#[derive(Clone, Debug)]
pub struct FeaturelessModel {
    /// Regression: `[mean]`. Classification: class frequencies.
    pub value: Vec<f64>,
}

pub(crate) fn fit(y: &Truth, n_classes: usize) -> FeaturelessModel {
    let value = match y {
        Truth::Values(v) => {
            vec![v.iter().sum::<f64>() / v.len() as f64]
        }
        Truth::Classes(codes) => {
            let mut counts = vec![0.0; n_classes];
            for &c in codes {
                counts[c as usize] += 1.0;
            }
            let n = codes.len() as f64;
            counts.iter_mut().for_each(|c| *c /= n);
            counts
        }
    };
    FeaturelessModel { value }
}

impl FeaturelessModel {
    pub(crate) fn predict_response(&self, table: &FeatureTable) -> Vec<f64> {
        vec![self.value[0]; table.n_rows()]
    }

    pub(crate) fn predict_probs(&self, table: &FeatureTable) -> Vec<f64> {
        let mut out = Vec::with_capacity(table.n_rows() * self.value.len());
        for _ in 0..table.n_rows() {
            out.extend_from_slice(&self.value);
        }
        out
    }
}
