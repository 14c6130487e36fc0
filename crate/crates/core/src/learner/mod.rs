//! Learners, fitted models, and predictions.
//!
//! Every learner is specified by a string such as `tree:max_depth=4` or
//! `random_forest:num_trees=100,mtry=3`. Parameters keep their defaults
//! unless set, and only non-default values show up in summaries. A fitted
//! model remembers the feature schema it was trained on and validates (and
//! level-remaps) any frame it later predicts on.

mod design;
mod featureless;
mod forest;
mod linalg;
mod linear;
mod logistic;
mod tree;

pub use linear::LinearModel;

use std::sync::Arc;

use crate::data::{Frame, Task, TaskType, Truth};
use crate::error::{Error, Result};
use crate::table::{FeatureSchema, FeatureTable, TableModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnerKind {
    Featureless,
    Linear,
    Logistic,
    Tree,
    RandomForest,
}

impl LearnerKind {
    pub fn id(self) -> &'static str {
        match self {
            LearnerKind::Featureless => "featureless",
            LearnerKind::Linear => "linear",
            LearnerKind::Logistic => "logistic",
            LearnerKind::Tree => "tree",
            LearnerKind::RandomForest => "random_forest",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Bool(v) => write!(f, "{v}"),
        }
    }
}

/// One hyperparameter with its current and default value.
#[derive(Clone, Debug)]
pub struct Param {
    pub name: &'static str,
    pub value: ParamValue,
    pub default: ParamValue,
    /// Smallest admissible integer for Int params.
    min_int: i64,
}

/// Whether classification predictions carry probabilities or labels only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictType {
    Response,
    Probability,
}

#[derive(Clone, Debug)]
pub struct Learner {
    pub kind: LearnerKind,
    params: Vec<Param>,
    pub predict_type: PredictType,
}

fn param(name: &'static str, default: ParamValue, min_int: i64) -> Param {
    Param {
        name,
        value: default,
        default,
        min_int,
    }
}

impl Learner {
    pub fn new(kind: LearnerKind) -> Learner {
        // min_leaf and mtry use 0 as "pick automatically at fit time".
        let params = match kind {
            LearnerKind::Featureless | LearnerKind::Linear => vec![],
            LearnerKind::Logistic => vec![param("max_iter", ParamValue::Int(100), 1)],
            LearnerKind::Tree => vec![
                param("max_depth", ParamValue::Int(30), 0),
                param("min_leaf", ParamValue::Int(0), 0),
            ],
            LearnerKind::RandomForest => vec![
                param("num_trees", ParamValue::Int(500), 1),
                param("mtry", ParamValue::Int(0), 0),
                param("bootstrap", ParamValue::Bool(true), 0),
                param("max_depth", ParamValue::Int(30), 0),
                param("min_leaf", ParamValue::Int(0), 0),
            ],
        };
        Learner {
            kind,
            params,
            predict_type: PredictType::Probability,
        }
    }

    /// Parse `name` or `name:key=value,...`; `predict_type` is accepted as
    /// a key for every learner.
    pub fn parse(spec: &str) -> Result<Learner> {
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (spec, None),
        };
        let kind = match name {
            "featureless" => LearnerKind::Featureless,
            "linear" => LearnerKind::Linear,
            "logistic" => LearnerKind::Logistic,
            "tree" => LearnerKind::Tree,
            "random_forest" => LearnerKind::RandomForest,
            other => return Err(Error::LearnerSpec(format!("unknown learner {other}"))),
        };
        let mut learner = Learner::new(kind);
        if let Some(rest) = rest {
            for pair in rest.split(',') {
                let (key, value) = pair
                    .split_once('=')
                    .ok_or_else(|| Error::LearnerSpec(format!("expected key=value, got {pair}")))?;
                learner.set_str(key, value)?;
            }
        }
        Ok(learner)
    }

    fn set_str(&mut self, key: &str, value: &str) -> Result<()> {
        if key == "predict_type" {
            self.predict_type = match value {
                "response" => PredictType::Response,
                "probability" => PredictType::Probability,
                other => {
                    return Err(Error::LearnerSpec(format!(
                        "predict_type must be response or probability, got {other}"
                    )))
                }
            };
            return Ok(());
        }
        let kind = self.kind.id();
        let slot = self
            .params
            .iter_mut()
            .find(|p| p.name == key)
            .ok_or_else(|| Error::LearnerSpec(format!("unknown parameter {key} for {kind}")))?;
        let parsed = match slot.default {
            ParamValue::Int(_) => value
                .parse::<i64>()
                .map(ParamValue::Int)
                .map_err(|_| Error::LearnerSpec(format!("{key} expects an integer, got {value}"))),
            ParamValue::Float(_) => value
                .parse::<f64>()
                .map(ParamValue::Float)
                .map_err(|_| Error::LearnerSpec(format!("{key} expects a number, got {value}"))),
            ParamValue::Bool(_) => match value {
                "true" => Ok(ParamValue::Bool(true)),
                "false" => Ok(ParamValue::Bool(false)),
                _ => Err(Error::LearnerSpec(format!(
                    "{key} expects true or false, got {value}"
                ))),
            },
        }?;
        if let ParamValue::Int(v) = parsed {
            if v < slot.min_int {
                return Err(Error::LearnerSpec(format!(
                    "{key} must be at least {}, got {v}",
                    slot.min_int
                )));
            }
        }
        slot.value = parsed;
        Ok(())
    }

    /// Set a parameter programmatically.
    pub fn with(mut self, key: &str, value: ParamValue) -> Result<Learner> {
        self.set_str(key, &value.to_string())?;
        Ok(self)
    }

    pub fn with_predict_type(mut self, predict_type: PredictType) -> Learner {
        self.predict_type = predict_type;
        self
    }

    fn get_int(&self, name: &str) -> i64 {
        match self.params.iter().find(|p| p.name == name) {
            Some(Param {
                value: ParamValue::Int(v),
                ..
            }) => *v,
            _ => panic!("no int parameter {name}"),
        }
    }

    fn get_bool(&self, name: &str) -> bool {
        match self.params.iter().find(|p| p.name == name) {
            Some(Param {
                value: ParamValue::Bool(v),
                ..
            }) => *v,
            _ => panic!("no bool parameter {name}"),
        }
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    /// Non-default parameters in declaration order, as display strings.
    pub fn hyperparameter_summary(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .params
            .iter()
            .filter(|p| p.value != p.default)
            .map(|p| (p.name.to_string(), p.value.to_string()))
            .collect();
        if self.predict_type == PredictType::Response {
            out.push(("predict_type".into(), "response".into()));
        }
        out
    }

    /// Canonical spec string: learner id plus non-default parameters.
    pub fn spec_string(&self) -> String {
        let parts = self.hyperparameter_summary();
        if parts.is_empty() {
            self.kind.id().to_string()
        } else {
            let kv: Vec<String> = parts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{}:{}", self.kind.id(), kv.join(","))
        }
    }

    fn resolve_min_leaf(&self, classification: bool) -> usize {
        match self.get_int("min_leaf") {
            0 => {
                if classification {
                    1
                } else {
                    5
                }
            }
            v => v as usize,
        }
    }
}

#[derive(Clone, Debug)]
enum ModelInner {
    Featureless(featureless::FeaturelessModel),
    Linear(linear::LinearModel),
    Logistic(logistic::LogisticModel),
    Tree(tree::TreeModel),
    Forest(forest::ForestModel),
}

/// A trained model bound to the schema and target it was fitted on.
#[derive(Clone, Debug)]
pub struct FittedModel {
    pub learner: Learner,
    schema: Arc<Vec<FeatureSchema>>,
    pub target: String,
    pub task_type: TaskType,
    /// Target level table; empty for regression.
    pub class_levels: Vec<String>,
    inner: ModelInner,
    pub warnings: Vec<String>,
}

/// Fit `learner` on the given rows of the task. `seed` feeds the random
/// forest's bootstrap and feature subsampling; other learners ignore it.
pub fn fit(learner: &Learner, task: &Task, rows: &[usize], seed: u64) -> Result<FittedModel> {
    if rows.is_empty() {
        return Err(Error::EmptyTask);
    }
    match (learner.kind, task.task_type) {
        (LearnerKind::Linear, t) if t.is_classification() => {
            return Err(Error::UnsupportedTask {
                learner: "linear",
                task_type: t.name().to_string(),
            })
        }
        (LearnerKind::Logistic, t) if t != TaskType::Binary => {
            return Err(Error::UnsupportedTask {
                learner: "logistic",
                task_type: t.name().to_string(),
            })
        }
        _ => {}
    }

    let table = FeatureTable::from_task(task, rows);
    let y = task.truth(rows);
    let class_levels: Vec<String> = task.class_levels().map(<[String]>::to_vec).unwrap_or_default();
    let n_classes = class_levels.len();
    let classification = task.task_type.is_classification();
    let mut warnings = Vec::new();

    let inner = match learner.kind {
        LearnerKind::Featureless => ModelInner::Featureless(featureless::fit(&y, n_classes)),
        LearnerKind::Linear => match &y {
            Truth::Values(v) => ModelInner::Linear(linear::fit(&table, v, &mut warnings)?),
            Truth::Classes(_) => unreachable!("checked above"),
        },
        LearnerKind::Logistic => match &y {
            Truth::Classes(c) => ModelInner::Logistic(logistic::fit(
                &table,
                c,
                learner.get_int("max_iter") as usize,
                &mut warnings,
            )?),
            Truth::Values(_) => unreachable!("checked above"),
        },
        LearnerKind::Tree => ModelInner::Tree(tree::fit(
            &table,
            &y,
            n_classes,
            tree::TreeSettings {
                max_depth: learner.get_int("max_depth") as usize,
                min_leaf: learner.resolve_min_leaf(classification),
                mtry: usize::MAX,
            },
            None,
        )),
        LearnerKind::RandomForest => {
            let p = table.n_features();
            let mtry = match learner.get_int("mtry") {
                0 => ((p as f64).sqrt().floor() as usize).max(1),
                v => (v as usize).min(p),
            };
            ModelInner::Forest(forest::fit(
                &table,
                &y,
                n_classes,
                forest::ForestSettings {
                    num_trees: learner.get_int("num_trees") as usize,
                    mtry,
                    bootstrap: learner.get_bool("bootstrap"),
                    max_depth: learner.get_int("max_depth") as usize,
                    min_leaf: learner.resolve_min_leaf(classification),
                },
                seed,
            ))
        }
    };

    Ok(FittedModel {
        learner: learner.clone(),
        schema: table.shared_schema(),
        target: task.target.clone(),
        task_type: task.task_type,
        class_levels,
        inner,
        warnings,
    })
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Held-out predictions for a set of rows.
#[derive(Clone, Debug)]
pub struct Prediction {
    /// Row indices into the originating frame.
    pub row_ids: Vec<usize>,
    /// Class level table; empty for regression.
    pub levels: Vec<String>,
    /// Regression predictions.
    pub response: Option<Vec<f64>>,
    /// Row-major class probabilities, `n * levels.len()`.
    pub probabilities: Option<Vec<f64>>,
    /// Hard labels as level codes.
    pub labels: Option<Vec<u32>>,
}

impl Prediction {
    pub fn n(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_classes(&self) -> usize {
        self.levels.len()
    }

    /// Probability row `i`, if probabilities are present.
    pub fn prob_row(&self, i: usize) -> Option<&[f64]> {
        let k = self.levels.len();
        self.probabilities.as_ref().map(|p| &p[i * k..(i + 1) * k])
    }

    /// Column `class` of the probability matrix.
    pub fn prob_column(&self, class: usize) -> Option<Vec<f64>> {
        let k = self.levels.len();
        self.probabilities
            .as_ref()
            .map(|p| (0..self.n()).map(|i| p[i * k + class]).collect())
    }
}

impl FittedModel {
    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn shared_schema(&self) -> Arc<Vec<FeatureSchema>> {
        Arc::clone(&self.schema)
    }

    pub fn n_classes(&self) -> usize {
        self.class_levels.len()
    }

    /// The fitted coefficients when this is a linear model.
    pub fn as_linear(&self) -> Option<&LinearModel> {
        match &self.inner {
            ModelInner::Linear(m) => Some(m),
            _ => None,
        }
    }

    /// Regression predictions on an already-validated table.
    pub(crate) fn response_on(&self, table: &FeatureTable) -> Vec<f64> {
        match &self.inner {
            ModelInner::Featureless(m) => m.predict_response(table),
            ModelInner::Linear(m) => m.predict_response(table),
            ModelInner::Tree(m) => m.predict_response(table),
            ModelInner::Forest(m) => m.predict_response(table),
            ModelInner::Logistic(_) => unreachable!("logistic is classification-only"),
        }
    }

    /// Row-major class probabilities on an already-validated table. All
    /// classifiers expose probabilities internally even when their
    /// predict type is `response`.
    pub(crate) fn probs_on(&self, table: &FeatureTable) -> Vec<f64> {
        match &self.inner {
            ModelInner::Featureless(m) => m.predict_probs(table),
            ModelInner::Logistic(m) => m.predict_probs(table),
            ModelInner::Tree(m) => m.predict_probs(table),
            ModelInner::Forest(m) => m.predict_probs(table),
            ModelInner::Linear(_) => unreachable!("linear is regression-only"),
        }
    }

    /// Predict the given rows of a frame, validating it against the fit
    /// schema.
    pub fn predict_frame(&self, frame: &Frame, rows: &[usize]) -> Result<Prediction> {
        let table = FeatureTable::from_frame(frame, rows, Arc::clone(&self.schema))?;
        Ok(self.predict_table_rows(&table, rows.to_vec()))
    }

    pub fn predict_task(&self, task: &Task, rows: &[usize]) -> Result<Prediction> {
        self.predict_frame(task.frame(), rows)
    }

    /// Predict every row of an already-validated feature table. Row ids
    /// are positional.
    pub fn predict_table(&self, table: &FeatureTable) -> Prediction {
        self.predict_table_rows(table, (0..table.n_rows()).collect())
    }

    fn predict_table_rows(&self, table: &FeatureTable, row_ids: Vec<usize>) -> Prediction {
        match self.task_type {
            TaskType::Regression => Prediction {
                row_ids,
                levels: Vec::new(),
                response: Some(self.response_on(table)),
                probabilities: None,
                labels: None,
            },
            TaskType::Binary | TaskType::Multiclass => {
                let k = self.n_classes();
                let probs = self.probs_on(table);
                let labels = (0..table.n_rows())
                    .map(|i| argmax(&probs[i * k..(i + 1) * k]) as u32)
                    .collect();
                Prediction {
                    row_ids,
                    levels: self.class_levels.clone(),
                    response: None,
                    probabilities: match self.learner.predict_type {
                        PredictType::Probability => Some(probs),
                        PredictType::Response => None,
                    },
                    labels: Some(labels),
                }
            }
        }
    }

    /// Number of trees for forest models (used in reports).
    pub fn num_trees(&self) -> Option<usize> {
        match &self.inner {
            ModelInner::Forest(m) => Some(m.num_trees()),
            _ => None,
        }
    }
}

/// Which scalar output of a model a curve should trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputKind {
    Response,
    /// Probability of one class (index into the class level table).
    ClassProb(usize),
}

/// Adapter exposing one scalar output of a fitted model as a
/// [`TableModel`].
pub struct ModelOutput<'a> {
    pub model: &'a FittedModel,
    pub kind: OutputKind,
}

impl TableModel for ModelOutput<'_> {
    fn predict_table(&self, table: &FeatureTable) -> Vec<f64> {
        match self.kind {
            OutputKind::Response => self.model.response_on(table),
            OutputKind::ClassProb(class) => {
                let k = self.model.n_classes();
                let probs = self.model.probs_on(table);
                (0..table.n_rows()).map(|i| probs[i * k + class]).collect()
            }
        }
    }
}

/// Output columns a summary traces for a task: each class for
/// classification (just the positive one for binary), or the response.
pub fn output_kinds(task_type: TaskType, positive: Option<usize>, n_classes: usize) -> Vec<OutputKind> {
    match task_type {
        TaskType::Regression => vec![OutputKind::Response],
        TaskType::Binary => vec![OutputKind::ClassProb(positive.unwrap_or(0))],
        TaskType::Multiclass => (0..n_classes).map(OutputKind::ClassProb).collect(),
    }
}
