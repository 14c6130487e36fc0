//! Summary configuration: which measures to compute, how many important
//! features to show, which paragraphs to hide, and display precision.
//!
//! Controls deserialize from JSON with unknown fields rejected; fields
//! left out take their defaults. Measure ids that depend on the task
//! type (performance, importance, fairness) are resolved later, when the
//! task is known.

use serde::Deserialize;

use crate::error::{Error, Result};

/// Paragraph names accepted in `hide`. The general paragraph is not
/// hidable.
pub const HIDABLE_PARAGRAPHS: &[&str] = &[
    "residuals",
    "performance",
    "complexity",
    "fairness",
    "importance",
    "effects",
];

pub const EFFECT_MEASURE_IDS: &[&str] = &["pdp", "ale"];
pub const COMPLEXITY_MEASURE_IDS: &[&str] = &["sparsity", "interaction_strength"];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SummaryControl {
    /// Performance measure specs (`auc`, `rmse:micro`, ...); `None`
    /// means the task-type defaults.
    pub measures: Option<Vec<String>>,
    pub complexity_measures: Vec<String>,
    /// Importance measure ids (`pdp`, `pfi.<loss>`); `None` means the
    /// task-type defaults.
    pub importance_measures: Option<Vec<String>>,
    /// Maximum number of feature rows in importance and effect output.
    pub n_important: usize,
    pub effect_measures: Vec<String>,
    /// Fairness measure ids; `None` means the task-type defaults.
    pub fairness_measures: Option<Vec<String>>,
    /// Protected attribute override; wins over the task's own role.
    pub protected_attribute: Option<String>,
    /// Paragraphs to hide from text output (kept in JSON, marked).
    pub hide: Vec<String>,
    /// Significant digits in text output.
    pub digits: usize,
}

impl Default for SummaryControl {
    fn default() -> SummaryControl {
        SummaryControl {
            measures: None,
            complexity_measures: COMPLEXITY_MEASURE_IDS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            importance_measures: None,
            n_important: 15,
            effect_measures: EFFECT_MEASURE_IDS.iter().map(|s| s.to_string()).collect(),
            fairness_measures: None,
            protected_attribute: None,
            hide: Vec::new(),
            digits: 4,
        }
    }
}

impl SummaryControl {
    /// Parse a control from JSON and validate the task-independent
    /// constraints.
    pub fn from_json(text: &str) -> Result<SummaryControl> {
        let control: SummaryControl = serde_json::from_str(text)?;
        control.validate()?;
        Ok(control)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_important < 1 {
            return Err(Error::Control("n_important must be at least 1".to_string()));
        }
        if self.digits < 1 {
            return Err(Error::Control("digits must be at least 1".to_string()));
        }
        for h in &self.hide {
            if h == "general" {
                return Err(Error::Control(
                    "the general paragraph cannot be hidden".to_string(),
                ));
            }
            if !HIDABLE_PARAGRAPHS.contains(&h.as_str()) {
                return Err(Error::Control(format!("unknown paragraph to hide: {h}")));
            }
        }
        for m in &self.effect_measures {
            if !EFFECT_MEASURE_IDS.contains(&m.as_str()) {
                return Err(Error::Control(format!("unknown effect measure: {m}")));
            }
        }
        for m in &self.complexity_measures {
            if !COMPLEXITY_MEASURE_IDS.contains(&m.as_str()) {
                return Err(Error::Control(format!("unknown complexity measure: {m}")));
            }
        }
        Ok(())
    }

    pub fn hidden(&self, paragraph: &str) -> bool {
        self.hide.iter().any(|h| h == paragraph)
    }
}
