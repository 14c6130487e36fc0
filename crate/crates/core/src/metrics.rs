//! Performance measures, confusion matrices, and fold aggregation.
//!
//! Every measure carries a direction (drives the report arrows), the
//! prediction component it needs, and the task types it applies to.
//! Aggregation is macro by default (per-fold mean and sample sd) with
//! micro (one evaluation on pooled predictions) available per measure.

use crate::data::{TaskType, Truth};
use crate::error::{Error, Result};
use crate::learner::Prediction;
use crate::resampling::ResampleResult;
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// Arrow glyph used in text reports.
    pub fn arrow(self) -> &'static str {
        match self {
            Direction::Minimize => "\u{2193}",
            Direction::Maximize => "\u{2191}",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Needs {
    Probabilities,
    Labels,
    Response,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggregationMode {
    Macro,
    Micro,
}

impl AggregationMode {
    pub fn name(self) -> &'static str {
        match self {
            AggregationMode::Macro => "macro",
            AggregationMode::Micro => "micro",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Measure {
    pub id: &'static str,
    pub direction: Direction,
    pub needs: Needs,
    pub supports_micro: bool,
    pub task_types: &'static [TaskType],
}

const BINARY: &[TaskType] = &[TaskType::Binary];
const CLASSIF: &[TaskType] = &[TaskType::Binary, TaskType::Multiclass];
const REGR: &[TaskType] = &[TaskType::Regression];

/// The measure catalog. Ids are the stable strings accepted in controls
/// and emitted in report JSON.
pub const CATALOG: &[Measure] = &[
    Measure {
        id: "auc",
        direction: Direction::Maximize,
        needs: Needs::Probabilities,
        supports_micro: true,
        task_types: BINARY,
    },
    Measure {
        id: "fbeta",
        direction: Direction::Maximize,
        needs: Needs::Labels,
        supports_micro: true,
        task_types: BINARY,
    },
    Measure {
        id: "bbrier",
        direction: Direction::Minimize,
        needs: Needs::Probabilities,
        supports_micro: true,
        task_types: BINARY,
    },
    Measure {
        id: "mcc",
        direction: Direction::Maximize,
        needs: Needs::Labels,
        supports_micro: true,
        task_types: BINARY,
    },
    Measure {
        id: "acc",
        direction: Direction::Maximize,
        needs: Needs::Labels,
        supports_micro: true,
        task_types: CLASSIF,
    },
    Measure {
        id: "ce",
        direction: Direction::Minimize,
        needs: Needs::Labels,
        supports_micro: true,
        task_types: CLASSIF,
    },
    Measure {
        id: "mbrier",
        direction: Direction::Minimize,
        needs: Needs::Probabilities,
        supports_micro: true,
        task_types: CLASSIF,
    },
    Measure {
        id: "rmse",
        direction: Direction::Minimize,
        needs: Needs::Response,
        supports_micro: true,
        task_types: REGR,
    },
    Measure {
        id: "mae",
        direction: Direction::Minimize,
        needs: Needs::Response,
        supports_micro: true,
        task_types: REGR,
    },
    Measure {
        id: "rsq",
        direction: Direction::Maximize,
        needs: Needs::Response,
        supports_micro: true,
        task_types: REGR,
    },
    Measure {
        id: "medae",
        direction: Direction::Minimize,
        needs: Needs::Response,
        supports_micro: true,
        task_types: REGR,
    },
    Measure {
        id: "mse",
        direction: Direction::Minimize,
        needs: Needs::Response,
        supports_micro: true,
        task_types: REGR,
    },
];

pub fn measure(id: &str) -> Result<&'static Measure> {
    CATALOG
        .iter()
        .find(|m| m.id == id)
        .ok_or_else(|| Error::UnknownMeasure(id.to_string()))
}

/// Parse `auc` or `auc:micro` into a measure and aggregation mode.
pub fn parse_measure_spec(spec: &str) -> Result<(&'static Measure, AggregationMode)> {
    let (id, mode) = match spec.split_once(':') {
        None => (spec, AggregationMode::Macro),
        Some((id, "macro")) => (id, AggregationMode::Macro),
        Some((id, "micro")) => (id, AggregationMode::Micro),
        Some((_, other)) => {
            return Err(Error::UnknownMeasure(format!(
                "{spec} (aggregation {other} is not macro or micro)"
            )))
        }
    };
    Ok((measure(id)?, mode))
}

/// The measure set reported when a control does not name any.
pub fn default_measures(task_type: TaskType) -> Vec<&'static Measure> {
    let ids: &[&str] = match task_type {
        TaskType::Binary => &["auc", "fbeta", "bbrier", "mcc"],
        TaskType::Multiclass => &["acc", "ce", "mbrier"],
        TaskType::Regression => &["rmse", "mae", "rsq", "medae"],
    };
    ids.iter().map(|id| measure(id).expect("catalog id")).collect()
}

/// One measure value, or NA with the reason attached.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Option<f64>,
    pub note: Option<String>,
}

impl Evaluation {
    fn of(value: f64) -> Evaluation {
        Evaluation {
            value: Some(value),
            note: None,
        }
    }

    fn undefined(note: impl Into<String>) -> Evaluation {
        Evaluation {
            value: None,
            note: Some(note.into()),
        }
    }

    fn flagged(value: f64, note: impl Into<String>) -> Evaluation {
        Evaluation {
            value: Some(value),
            note: Some(note.into()),
        }
    }
}

/// Evaluate one measure on a prediction. `positive` is the positive class
/// index for binary measures.
pub fn evaluate(
    m: &Measure,
    prediction: &Prediction,
    truth: &Truth,
    positive: Option<usize>,
) -> Result<Evaluation> {
    if prediction.n() != truth.len() {
        return Err(Error::LengthMismatch {
            prediction: prediction.n(),
            truth: truth.len(),
        });
    }
    match m.needs {
        Needs::Probabilities if prediction.probabilities.is_none() => {
            return Err(Error::MeasureNeeds {
                measure: m.id,
                needs: "probabilities",
            })
        }
        Needs::Labels if prediction.labels.is_none() => {
            return Err(Error::MeasureNeeds {
                measure: m.id,
                needs: "hard labels",
            })
        }
        Needs::Response if prediction.response.is_none() => {
            return Err(Error::MeasureNeeds {
                measure: m.id,
                needs: "a numeric response",
            })
        }
        _ => {}
    }

    let pos = positive.unwrap_or(0);
    Ok(match m.id {
        "auc" => auc(prediction, truth, pos),
        "fbeta" => {
            let c = binary_counts(prediction, truth, pos);
            let denom = 2.0 * c.tp + c.fp + c.fn_;
            if denom == 0.0 {
                Evaluation::flagged(0.0, "fbeta denominator zero; value set to 0")
            } else {
                Evaluation::of(2.0 * c.tp / denom)
            }
        }
        "bbrier" => {
            let scores = prediction.prob_column(pos).expect("checked needs");
            let codes = truth_codes(truth);
            let value = scores
                .iter()
                .zip(codes)
                .map(|(p, &y)| {
                    let t = if y as usize == pos { 1.0 } else { 0.0 };
                    (p - t) * (p - t)
                })
                .sum::<f64>()
                / scores.len() as f64;
            Evaluation::of(value)
        }
        "mcc" => {
            let c = binary_counts(prediction, truth, pos);
            let denom =
                ((c.tp + c.fp) * (c.tp + c.fn_) * (c.tn + c.fp) * (c.tn + c.fn_)).sqrt();
            if denom == 0.0 {
                Evaluation::flagged(0.0, "mcc denominator zero; value set to 0 by convention")
            } else {
                Evaluation::of((c.tp * c.tn - c.fp * c.fn_) / denom)
            }
        }
        "acc" => Evaluation::of(accuracy(prediction, truth)),
        "ce" => Evaluation::of(1.0 - accuracy(prediction, truth)),
        "mbrier" => {
            let probs = prediction.probabilities.as_ref().expect("checked needs");
            let k = prediction.n_classes();
            let codes = truth_codes(truth);
            let mut total = 0.0;
            for (i, &y) in codes.iter().enumerate() {
                for c in 0..k {
                    let t = if c == y as usize { 1.0 } else { 0.0 };
                    let d = probs[i * k + c] - t;
                    total += d * d;
                }
            }
            Evaluation::of(total / codes.len() as f64)
        }
        "rmse" => Evaluation::of(mean_sq_error(prediction, truth).sqrt()),
        "mse" => Evaluation::of(mean_sq_error(prediction, truth)),
        "mae" => {
            let (pred, y) = regression_pair(prediction, truth);
            let value = pred
                .iter()
                .zip(y)
                .map(|(p, t)| (p - t).abs())
                .sum::<f64>()
                / y.len() as f64;
            Evaluation::of(value)
        }
        "medae" => {
            let (pred, y) = regression_pair(prediction, truth);
            let mut abs: Vec<f64> = pred.iter().zip(y).map(|(p, t)| (p - t).abs()).collect();
            abs.sort_by(f64::total_cmp);
            Evaluation::of(stats::quantile_type7(&abs, 0.5))
        }
        "rsq" => {
            let (pred, y) = regression_pair(prediction, truth);
            let mean = stats::mean(y);
            let sst: f64 = y.iter().map(|t| (t - mean) * (t - mean)).sum();
            if sst == 0.0 {
                Evaluation::undefined("rsq undefined: constant truth (SST is zero)")
            } else {
                let sse: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
                Evaluation::of(1.0 - sse / sst)
            }
        }
        other => return Err(Error::UnknownMeasure(other.to_string())),
    })
}

fn truth_codes(truth: &Truth) -> &[u32] {
    match truth {
        Truth::Classes(c) => c,
        Truth::Values(_) => panic!("classification measure on regression truth"),
    }
}

fn regression_pair<'a>(prediction: &'a Prediction, truth: &'a Truth) -> (&'a [f64], &'a [f64]) {
    let pred = prediction.response.as_ref().expect("checked needs");
    match truth {
        Truth::Values(v) => (pred, v),
        Truth::Classes(_) => panic!("regression measure on classification truth"),
    }
}

fn mean_sq_error(prediction: &Prediction, truth: &Truth) -> f64 {
    let (pred, y) = regression_pair(prediction, truth);
    pred.iter()
        .zip(y)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / y.len() as f64
}

fn accuracy(prediction: &Prediction, truth: &Truth) -> f64 {
    let labels = prediction.labels.as_ref().expect("checked needs");
    let codes = truth_codes(truth);
    let hits = labels.iter().zip(codes).filter(|(p, t)| p == t).count();
    hits as f64 / codes.len() as f64
}

struct BinaryCounts {
    tp: f64,
    fp: f64,
    fn_: f64,
    tn: f64,
}

fn binary_counts(prediction: &Prediction, truth: &Truth, positive: usize) -> BinaryCounts {
    let labels = prediction.labels.as_ref().expect("checked needs");
    let codes = truth_codes(truth);
    let mut c = BinaryCounts {
        tp: 0.0,
        fp: 0.0,
        fn_: 0.0,
        tn: 0.0,
    };
    for (&p, &t) in labels.iter().zip(codes) {
        let pred_pos = p as usize == positive;
        let true_pos = t as usize == positive;
        match (true_pos, pred_pos) {
            (true, true) => c.tp += 1.0,
            (false, true) => c.fp += 1.0,
            (true, false) => c.fn_ += 1.0,
            (false, false) => c.tn += 1.0,
        }
    }
    c
}

/// Mann-Whitney AUC with half credit for ties, computed from average
/// ranks. Rank sums are exact multiples of one half, so this matches the
/// all-pairs definition bit for bit.
fn auc(prediction: &Prediction, truth: &Truth, positive: usize) -> Evaluation {
    let scores = prediction.prob_column(positive).expect("checked needs");
    let codes = truth_codes(truth);
    let n = scores.len();
    let n_pos = codes.iter().filter(|&&c| c as usize == positive).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Evaluation::undefined("auc undefined: truth contains a single class");
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j+1 average to (i + j)/2 + 1.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    let rank_sum_pos: f64 = codes
        .iter()
        .enumerate()
        .filter(|(_, &c)| c as usize == positive)
        .map(|(i, _)| ranks[i])
        .sum();
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Evaluation::of(u / (n_pos * n_neg) as f64)
}

/// Square count matrix, rows = true class, columns = predicted class.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionMatrix {
    pub levels: Vec<String>,
    /// Row-major counts, `levels.len()` squared.
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.levels.len()
    }

    pub fn get(&self, true_class: usize, predicted: usize) -> u64 {
        self.counts[true_class * self.levels.len() + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Fold matrices pool by plain addition.
    pub fn add(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.levels, other.levels, "confusion level tables");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

pub fn confusion(prediction: &Prediction, truth: &Truth) -> Result<ConfusionMatrix> {
    let labels = prediction.labels.as_ref().ok_or(Error::MeasureNeeds {
        measure: "confusion",
        needs: "hard labels",
    })?;
    let codes = truth_codes(truth);
    if labels.len() != codes.len() {
        return Err(Error::LengthMismatch {
            prediction: labels.len(),
            truth: codes.len(),
        });
    }
    let k = prediction.n_classes();
    let mut counts = vec![0u64; k * k];
    for (&p, &t) in labels.iter().zip(codes) {
        counts[t as usize * k + p as usize] += 1;
    }
    Ok(ConfusionMatrix {
        levels: prediction.levels.clone(),
        counts,
    })
}

/// A measure aggregated over resampling iterations.
#[derive(Clone, Debug)]
pub struct AggregatedMeasure {
    pub id: String,
    pub direction: Direction,
    pub mode: AggregationMode,
    pub mean: Option<f64>,
    /// Sample sd over folds; macro mode with at least two defined folds.
    pub sd: Option<f64>,
    /// Per-fold values (macro only; empty for micro).
    pub per_fold: Vec<Option<f64>>,
    pub notes: Vec<String>,
}

/// Aggregate a measure over all iterations of a resample result.
pub fn aggregate(
    m: &Measure,
    mode: AggregationMode,
    rr: &ResampleResult,
) -> Result<AggregatedMeasure> {
    let task = &rr.task;
    if !m.task_types.contains(&task.task_type) {
        return Err(Error::MeasureTaskMismatch {
            measure: m.id.to_string(),
            task_type: task.task_type.name().to_string(),
        });
    }
    let positive = task.positive_index();
    match mode {
        AggregationMode::Macro => {
            let mut per_fold = Vec::with_capacity(rr.iterations.len());
            let mut values = Vec::new();
            let mut notes = Vec::new();
            for it in &rr.iterations {
                let truth = task.truth(&it.test);
                let ev = evaluate(m, &it.prediction, &truth, positive)?;
                if let Some(note) = ev.note {
                    notes.push(format!("fold {}: {note}", it.fold));
                }
                if let Some(v) = ev.value {
                    values.push(v);
                } else {
                    notes.push(format!("fold {} excluded from the mean", it.fold));
                }
                per_fold.push(ev.value);
            }
            let mean = (!values.is_empty()).then(|| stats::mean(&values));
            let sd = stats::sample_sd(&values);
            Ok(AggregatedMeasure {
                id: m.id.to_string(),
                direction: m.direction,
                mode,
                mean,
                sd,
                per_fold,
                notes,
            })
        }
        AggregationMode::Micro => {
            if !m.supports_micro {
                return Err(Error::MicroUnsupported(m.id.to_string()));
            }
            let (prediction, truth) = pooled(rr);
            let ev = evaluate(m, &prediction, &truth, positive)?;
            Ok(AggregatedMeasure {
                id: m.id.to_string(),
                direction: m.direction,
                mode,
                mean: ev.value,
                sd: None,
                per_fold: Vec::new(),
                notes: ev.note.into_iter().collect(),
            })
        }
    }
}

/// Concatenate every fold's held-out predictions and truths.
pub fn pooled(rr: &ResampleResult) -> (Prediction, Truth) {
    let first = &rr.iterations[0].prediction;
    let mut row_ids = Vec::new();
    let mut response = first.response.as_ref().map(|_| Vec::new());
    let mut probabilities = first.probabilities.as_ref().map(|_| Vec::new());
    let mut labels = first.labels.as_ref().map(|_| Vec::new());
    for it in &rr.iterations {
        row_ids.extend_from_slice(&it.prediction.row_ids);
        if let (Some(acc), Some(v)) = (response.as_mut(), it.prediction.response.as_ref()) {
            acc.extend_from_slice(v);
        }
        if let (Some(acc), Some(v)) = (probabilities.as_mut(), it.prediction.probabilities.as_ref())
        {
            acc.extend_from_slice(v);
        }
        if let (Some(acc), Some(v)) = (labels.as_mut(), it.prediction.labels.as_ref()) {
            acc.extend_from_slice(v);
        }
    }
    let truth = rr.task.truth(&row_ids);
    let prediction = Prediction {
        row_ids,
        levels: first.levels.clone(),
        response,
        probabilities,
        labels,
    };
    (prediction, truth)
}
