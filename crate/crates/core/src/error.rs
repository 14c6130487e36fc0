//! Error type shared across the crate.

use thiserror::Error;

/// Any failure raised while loading data, fitting models, evaluating
/// measures, or assembling a summary report.
#[derive(Error, Debug)]
pub enum Error {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },

    #[error("unparseable numeric at row {row}, column {column}")]
    UnparseableNumeric { row: usize, column: String },

    #[error("duplicate column name {0}")]
    DuplicateColumn(String),

    #[error("column {column} has {got} rows, expected {expected}")]
    ColumnLength {
        column: String,
        expected: usize,
        got: usize,
    },

    #[error("invalid column: {0}")]
    InvalidColumn(String),

    #[error("unknown column {0}")]
    UnknownColumn(String),

    #[error("task has no rows")]
    EmptyTask,

    #[error("target column {0} is constant")]
    ConstantTarget(String),

    #[error("positive class declared for non-binary target {0}")]
    InvalidPositiveClass(String),

    #[error("positive class {class} is not a level of target {target}")]
    UnknownPositiveClass { target: String, class: String },

    #[error("protected attribute {0} must be categorical with at least 2 levels")]
    InvalidProtected(String),

    #[error("invalid learner spec: {0}")]
    LearnerSpec(String),

    #[error("learner {learner} does not support {task_type} tasks")]
    UnsupportedTask {
        learner: &'static str,
        task_type: String,
    },

    #[error("predict frame is missing feature {0}")]
    MissingFeature(String),

    #[error("feature {feature} has kind {got}, expected {expected}")]
    FeatureKindMismatch {
        feature: String,
        expected: &'static str,
        got: &'static str,
    },

    #[error("unseen level {level} in feature {feature}")]
    UnseenLevel { feature: String, level: String },

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("invalid resampling spec: {0}")]
    ResamplingSpec(String),

    #[error("cannot split {n} rows into {k} folds")]
    TooFewRows { n: usize, k: usize },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown measure {0}")]
    UnknownMeasure(String),

    #[error("measure {measure} needs {needs}")]
    MeasureNeeds {
        measure: &'static str,
        needs: &'static str,
    },

    #[error("measure {measure} does not apply to {task_type} tasks")]
    MeasureTaskMismatch {
        measure: String,
        task_type: String,
    },

    #[error("measure {measure} undefined: {reason}")]
    MeasureUndefined {
        measure: &'static str,
        reason: String,
    },

    #[error("measure {0} does not support micro aggregation")]
    MicroUnsupported(String),

    #[error("prediction and truth lengths differ: {prediction} vs {truth}")]
    LengthMismatch { prediction: usize, truth: usize },

    #[error("effect curves have mismatched grids for feature {0}")]
    GridMismatch(String),

    #[error("no curves to aggregate")]
    EmptyAggregation,

    #[error("unknown fairness measure {0}")]
    UnknownFairnessMeasure(String),

    #[error("fairness measure {measure} does not apply to {task_type} tasks")]
    FairnessTaskMismatch { measure: String, task_type: String },

    #[error("invalid control: {0}")]
    Control(String),

    #[error("resample result has no stored models; re-run resample with model storage")]
    ModelsNotStored,

    #[error("model learner spec does not match the resample result")]
    LearnerMismatch,

    #[error("report width {0} is below the minimum of 40")]
    WidthTooSmall(usize),

    #[error("simulation needs at least 5 features, got {0}")]
    SimTooFewFeatures(usize),

    #[error("invalid bench grid: {0}")]
    BenchGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap an error with the resampling iteration it occurred in.
    pub fn in_fold(self, fold: usize) -> Error {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }
}
