//! Group fairness over a protected attribute: demographic parity,
//! equalized odds, conditional use accuracy equality, and a regression
//! MSE gap, each per fold with cross-fold aggregation.
//!
//! All measures are gaps between group-conditional rates, reduced over
//! multiple groups as the maximum pairwise absolute difference (which is
//! max minus min). Zero means parity on the evaluated rows. Composite
//! measures average their rate gaps; a gap whose denominators vanish in
//! too many groups is dropped from the composite and the rest is
//! averaged, with a flag.

use crate::data::{Task, TaskType, Truth};
use crate::error::{Error, Result};
use crate::learner::Prediction;
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FairnessMeasure {
    /// Demographic parity: gap in positive-prediction rates.
    Dp,
    /// Equalized odds: mean of the TPR and FPR gaps.
    Eod,
    /// Conditional use accuracy equality: mean of the PPV and NPV gaps.
    Cuae,
    /// Gap in group mean squared errors (regression).
    RegMseGap,
}

impl FairnessMeasure {
    pub fn id(self) -> &'static str {
        match self {
            FairnessMeasure::Dp => "dp",
            FairnessMeasure::Eod => "eod",
            FairnessMeasure::Cuae => "cuae",
            FairnessMeasure::RegMseGap => "reg_mse_gap",
        }
    }

    pub fn parse(id: &str) -> Result<FairnessMeasure> {
        match id {
            "dp" => Ok(FairnessMeasure::Dp),
            "eod" => Ok(FairnessMeasure::Eod),
            "cuae" => Ok(FairnessMeasure::Cuae),
            "reg_mse_gap" => Ok(FairnessMeasure::RegMseGap),
            other => Err(Error::UnknownFairnessMeasure(other.to_string())),
        }
    }

    pub fn applies_to(self, task_type: TaskType) -> bool {
        match self {
            FairnessMeasure::RegMseGap => task_type == TaskType::Regression,
            _ => task_type.is_classification(),
        }
    }
}

/// Default fairness measures once a protected attribute is resolved.
pub fn default_fairness_measures(task_type: TaskType) -> Vec<FairnessMeasure> {
    if task_type.is_classification() {
        vec![
            FairnessMeasure::Dp,
            FairnessMeasure::Cuae,
            FairnessMeasure::Eod,
        ]
    } else {
        vec![FairnessMeasure::RegMseGap]
    }
}

/// One fold's value; `None` when the measure is undefined on the fold.
#[derive(Clone, Debug)]
pub struct FoldFairness {
    pub value: Option<f64>,
    pub flags: Vec<String>,
}

impl FoldFairness {
    fn undefined(flag: String) -> FoldFairness {
        FoldFairness {
            value: None,
            flags: vec![flag],
        }
    }
}

/// Max-minus-min over the defined group rates; fewer than two defined
/// rates leaves the gap undefined.
fn gap(rates: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = rates.iter().filter_map(|r| *r).collect();
    if defined.len() < 2 {
        return None;
    }
    let lo = defined.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = defined.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    Some(hi - lo)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Compose rate gaps into a measure value: the mean of the defined gaps.
/// Undefined gaps are dropped with a flag; all dropped means the fold is
/// undefined.
fn compose(parts: &[(&str, Option<f64>)], flags: &mut Vec<String>) -> Option<f64> {
    let defined: Vec<f64> = parts.iter().filter_map(|(_, g)| *g).collect();
    for (name, g) in parts {
        if g.is_none() {
            flags.push(format!(
                "{name} gap undefined (empty denominators); remaining terms renormalized"
            ));
        }
    }
    if defined.is_empty() {
        return None;
    }
    Some(defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Evaluate one fairness measure on one fold.
///
/// `groups` holds the protected level code of each held-out row, with
/// `levels` naming the codes. Classification predictions are reduced to
/// hard labels first (the stored labels are the 0.5-threshold decisions
/// for binary probabilities).
pub fn evaluate_fairness(
    m: FairnessMeasure,
    task_type: TaskType,
    prediction: &Prediction,
    truth: &Truth,
    positive: Option<usize>,
    groups: &[u32],
    levels: &[String],
) -> FoldFairness {
    let n_groups = levels.len();
    let mut present = vec![0u64; n_groups];
    for &g in groups {
        present[g as usize] += 1;
    }
    if present.iter().filter(|&&c| c > 0).count() < 2 {
        return FoldFairness::undefined(
            "fewer than 2 protected groups in the fold; value excluded".to_string(),
        );
    }

    match m {
        FairnessMeasure::RegMseGap => {
            let response = prediction
                .response
                .as_ref()
                .expect("regression prediction has a response");
            let values = match truth {
                Truth::Values(v) => v,
                Truth::Classes(_) => unreachable!("regression truth is numeric"),
            };
            let mut sse = vec![0.0; n_groups];
            for (i, &g) in groups.iter().enumerate() {
                sse[g as usize] += (response[i] - values[i]).powi(2);
            }
            let rates: Vec<Option<f64>> = (0..n_groups)
                .map(|g| {
                    if present[g] > 0 {
                        Some(sse[g] / present[g] as f64)
                    } else {
                        None
                    }
                })
                .collect();
            FoldFairness {
                value: gap(&rates),
                flags: Vec::new(),
            }
        }
        FairnessMeasure::Dp | FairnessMeasure::Eod | FairnessMeasure::Cuae => {
            if task_type == TaskType::Multiclass {
                return FoldFairness::undefined(format!(
                    "{} is defined for binary tasks; fold excluded",
                    m.id()
                ));
            }
            let labels = prediction
                .labels
                .as_ref()
                .expect("classification prediction has labels");
            let codes = match truth {
                Truth::Classes(c) => c,
                Truth::Values(_) => unreachable!("classification truth is coded"),
            };
            let pos = positive.unwrap_or(0) as u32;
            // Confusion counts per group.
            let mut tp = vec![0u64; n_groups];
            let mut fn_ = vec![0u64; n_groups];
            let mut fp = vec![0u64; n_groups];
            let mut tn = vec![0u64; n_groups];
            for (i, &g) in groups.iter().enumerate() {
                let g = g as usize;
                match (codes[i] == pos, labels[i] == pos) {
                    (true, true) => tp[g] += 1,
                    (true, false) => fn_[g] += 1,
                    (false, true) => fp[g] += 1,
                    (false, false) => tn[g] += 1,
                }
            }
            let mut flags = Vec::new();
            let value = match m {
                FairnessMeasure::Dp => {
                    let rates: Vec<Option<f64>> = (0..n_groups)
                        .map(|g| ratio(tp[g] + fp[g], present[g]))
                        .collect();
                    gap(&rates)
                }
                FairnessMeasure::Eod => {
                    let tpr: Vec<Option<f64>> = (0..n_groups)
                        .map(|g| ratio(tp[g], tp[g] + fn_[g]))
                        .collect();
                    let fpr: Vec<Option<f64>> = (0..n_groups)
                        .map(|g| ratio(fp[g], fp[g] + tn[g]))
                        .collect();
                    compose(&[("tpr", gap(&tpr)), ("fpr", gap(&fpr))], &mut flags)
                }
                FairnessMeasure::Cuae => {
                    let ppv: Vec<Option<f64>> = (0..n_groups)
                        .map(|g| ratio(tp[g], tp[g] + fp[g]))
                        .collect();
                    let npv: Vec<Option<f64>> = (0..n_groups)
                        .map(|g| ratio(tn[g], tn[g] + fn_[g]))
                        .collect();
                    compose(&[("ppv", gap(&ppv)), ("npv", gap(&npv))], &mut flags)
                }
                FairnessMeasure::RegMseGap => unreachable!(),
            };
            if value.is_none() && flags.is_empty() {
                flags.push("all rate gaps undefined; fold excluded".to_string());
            }
            FoldFairness { value, flags }
        }
    }
}

/// Cross-fold aggregate of one fairness measure.
#[derive(Clone, Debug)]
pub struct FairnessRecord {
    pub id: String,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub per_fold: Vec<Option<f64>>,
    pub notes: Vec<String>,
}

/// Mean and sample sd over folds where the measure is defined; undefined
/// folds are excluded and their flags recorded.
pub fn aggregate_fairness(m: FairnessMeasure, folds: &[FoldFairness]) -> FairnessRecord {
    let mut notes = Vec::new();
    for (i, f) in folds.iter().enumerate() {
        for flag in &f.flags {
            notes.push(format!("fold {i}: {flag}"));
        }
    }
    let defined: Vec<f64> = folds.iter().filter_map(|f| f.value).collect();
    FairnessRecord {
        id: m.id().to_string(),
        mean: if defined.is_empty() {
            None
        } else {
            Some(stats::mean(&defined))
        },
        sd: stats::sample_sd(&defined),
        per_fold: folds.iter().map(|f| f.value).collect(),
        notes,
    }
}

/// Resolve the protected attribute: an explicit control setting wins
/// over the task's own role; neither set means no fairness paragraph.
pub fn resolve_protected(task: &Task, control_protected: Option<&str>) -> Result<Option<String>> {
    let name = match control_protected {
        Some(name) => name.to_string(),
        None => match &task.protected {
            Some(name) => name.clone(),
            None => return Ok(None),
        },
    };
    let col = task
        .frame()
        .column(&name)
        .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
    match col.levels() {
        Some(levels) if levels.len() >= 2 => {}
        _ => return Err(Error::InvalidProtected(name)),
    }
    if name == task.target {
        return Err(Error::InvalidProtected(name));
    }
    Ok(Some(name))
}

/// Protected level codes and names for the full task; index by held-out
/// rows to get fold groups.
pub fn protected_codes<'a>(task: &'a Task, name: &str) -> Result<(&'a [u32], &'a [String])> {
    let col = task
        .frame()
        .column(name)
        .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
    col.as_categorical()
        .ok_or_else(|| Error::InvalidProtected(name.to_string()))
}
