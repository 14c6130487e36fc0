//! Model-agnostic summaries for tabular learners.
//!
//! The crate trains models under a resampling strategy and distills the
//! result into a structured report: performance with dispersion across
//! folds, residuals, feature effects, feature importance, model complexity,
//! and fairness across a protected attribute. Reports render as aligned
//! text or canonical JSON, and every stage is deterministic for a fixed
//! seed regardless of worker count.

pub mod bench;
pub mod complexity;
pub mod control;
pub mod data;
pub mod effects;
pub mod error;
pub(crate) mod exec;
pub mod fairness;
pub mod importance;
pub mod learner;
pub mod metrics;
pub mod report;
pub mod resampling;
pub mod residuals;
pub mod seed;
pub mod sim;
pub(crate) mod stats;
pub mod summary;
pub mod table;

pub use complexity::{
    aggregate_complexity, interaction_strength, sparsity, ComplexityAggregate, ComplexityRecord,
};
pub use control::SummaryControl;
pub use data::{
    load_csv, make_task, make_task_with, read_csv, save_csv, write_csv, Column, ColumnData,
    ColumnKind, ColumnOverride, Frame, Task, TaskSpec, TaskType, Truth,
};
pub use effects::{
    aggregate_effects, ale, build_grid, cap_rows, effect_classes, pdp, EffectCurve, EffectGrid,
    EffectMethod, GridPoints,
};
pub use error::{Error, Result};
pub use fairness::{
    aggregate_fairness, default_fairness_measures, evaluate_fairness, protected_codes,
    resolve_protected, FairnessMeasure, FairnessRecord, FoldFairness,
};
pub use importance::{
    default_importance_measures, importance_table, parse_importance_measure, pdp_importance, pfi,
    ImportanceMeasure, ImportanceTable,
};
pub use learner::{fit, FittedModel, Learner, LearnerKind, ParamValue, PredictType, Prediction};
pub use report::{render_json, render_text, SummaryReport, DEFAULT_WIDTH};
pub use bench::{parse_grid, run_bench, write_bench_csv, BenchRow, BenchSpec};
pub use sim::{simulate, simulate_task};
pub use summary::summarize;
pub use resampling::{resample, ResampleResult, ResamplingKind, ResamplingStrategy};
pub use table::{FeatureSchema, FeatureTable, TableModel};
