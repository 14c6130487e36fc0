//! Summary orchestration.
//!
//! [`summarize`] turns a fitted model plus a resample result into a
//! [`SummaryReport`]: performance, residuals, complexity, optional
//! fairness, importance, and effect curves, each computed on held-out
//! rows with the fold's own model. Heavy work is split into (fold,
//! feature) units with pre-derived seeds, so output does not depend on
//! the worker count.

use std::sync::Arc;

use crate::complexity::{
    aggregate_complexity, interaction_strength, ComplexityRecord, SPARSITY_EPSILON,
};
use crate::control::SummaryControl;
use crate::data::Truth;
use crate::effects::{
    aggregate_effects, ale, build_grid, cap_rows, effect_classes, pdp, EffectCurve, EffectGrid,
    GridPoints, DEFAULT_GRID_SIZE, MAX_EFFECT_ROWS,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::fairness::{
    aggregate_fairness, default_fairness_measures, evaluate_fairness, protected_codes,
    resolve_protected, FairnessMeasure, FoldFairness,
};
use crate::importance::{
    default_importance_measures, importance_table, parse_importance_measure, pdp_importance, pfi,
    ImportanceMeasure, DEFAULT_PFI_REPS,
};
use crate::learner::{output_kinds, FittedModel, ModelOutput};
use crate::metrics::{
    aggregate, default_measures, parse_measure_spec, AggregationMode, Direction, Measure,
};
use crate::report::{
    AggregateEntry, ComplexityParagraph, ConfusionJson, EffectEntry, EffectsParagraph,
    FairnessEntry, FairnessParagraph, FoldCurve, GeneralParagraph, GridJson, ImportanceParagraph,
    NameValue, PerformanceEntry, PerformanceParagraph, ResidualsParagraph, Section, SummaryReport,
};
use crate::resampling::ResampleResult;
use crate::residuals::{residual_kind, summarize_residuals, ResidualSummary};
use crate::seed;
use crate::table::{FeatureTable, TableModel};

/// Everything one (fold, feature) work unit produces.
struct UnitOut {
    pdp: Vec<EffectCurve>,
    ale: Vec<EffectCurve>,
    pfi: Vec<f64>,
}

/// Per-fold inputs shared by all of that fold's work units.
struct FoldCtx<'a> {
    model: &'a FittedModel,
    table: FeatureTable,
    truth: Truth,
    /// One prediction vector per traced output column.
    outputs: Vec<Vec<f64>>,
}

/// Summarize a model through the lens of a resample result.
///
/// `model` contributes only to the general paragraph; every
/// performance, fairness, effect, importance, and complexity number
/// comes from the resample iterations. The resample result must store
/// its fold models and must have been produced by the same learner
/// configuration as `model`.
pub fn summarize(
    model: &FittedModel,
    rr: &ResampleResult,
    control: &SummaryControl,
    workers: usize,
) -> Result<SummaryReport> {
    control.validate()?;
    if rr.iterations.iter().any(|it| it.model.is_none()) {
        return Err(Error::ModelsNotStored);
    }
    if model.learner.spec_string() != rr.learner.spec_string() {
        return Err(Error::LearnerMismatch);
    }
    let task = &rr.task;
    let tt = task.task_type;
    let positive = task.positive_index();

    let performance = performance_paragraph(rr, control)?;
    let residuals = residuals_paragraph(rr)?;
    let fairness = fairness_paragraph(rr, control)?;

    // Shared inputs for the per-fold work: grids from the full task,
    // one traced output column per class (or the response).
    let master = rr.strategy.seed;
    let p = task.feature_names.len();
    let grids: Vec<Arc<EffectGrid>> = task
        .feature_names
        .iter()
        .map(|f| build_grid(task, f, DEFAULT_GRID_SIZE).map(Arc::new))
        .collect::<Result<_>>()?;
    let classes = effect_classes(task);
    let kinds = output_kinds(tt, positive, model.n_classes());

    let folds: Vec<FoldCtx> = rr
        .iterations
        .iter()
        .map(|it| {
            let fold_model = it.model.as_ref().expect("models checked above");
            let rows = cap_rows(
                &it.test,
                MAX_EFFECT_ROWS,
                seed::derive_path(master, &[seed::TAG_SUBSAMPLE, it.fold as u64]),
            );
            let table = FeatureTable::from_frame(task.frame(), &rows, fold_model.shared_schema())?;
            let truth = task.truth(&rows);
            let outputs = kinds
                .iter()
                .map(|&kind| {
                    ModelOutput {
                        model: fold_model,
                        kind,
                    }
                    .predict_table(&table)
                })
                .collect();
            Ok(FoldCtx {
                model: fold_model,
                table,
                truth,
                outputs,
            })
        })
        .collect::<Result<_>>()?;

    let imp_measures: Vec<ImportanceMeasure> = match &control.importance_measures {
        Some(ids) => ids
            .iter()
            .map(|id| parse_importance_measure(id, tt))
            .collect::<Result<_>>()?,
        None => default_importance_measures(tt),
    };
    let pfi_losses: Vec<&'static Measure> = imp_measures
        .iter()
        .filter_map(|m| match m {
            ImportanceMeasure::Pfi(loss) => Some(*loss),
            ImportanceMeasure::Pdp => None,
        })
        .collect();

    let n_units = folds.len() * p;
    let units: Vec<UnitOut> = exec::try_run_indexed(workers, n_units, |u| {
        let fold = u / p;
        let j = u % p;
        let ctx = &folds[fold];
        let mut pdp_curves = Vec::with_capacity(kinds.len());
        let mut ale_curves = Vec::with_capacity(kinds.len());
        for (c, &kind) in kinds.iter().enumerate() {
            let output = ModelOutput {
                model: ctx.model,
                kind,
            };
            pdp_curves.push(pdp(&output, &ctx.table, &grids[j], &classes[c], fold)?);
            ale_curves.push(ale(&output, &ctx.table, &grids[j], &classes[c], fold)?);
        }
        let mut pfi_vals = Vec::with_capacity(pfi_losses.len());
        for loss in &pfi_losses {
            let s = seed::derive_path(master, &[seed::TAG_PFI, fold as u64]);
            pfi_vals.push(pfi(
                ctx.model,
                &ctx.table,
                &ctx.truth,
                positive,
                loss,
                j,
                DEFAULT_PFI_REPS,
                s,
            )?);
        }
        Ok(UnitOut {
            pdp: pdp_curves,
            ale: ale_curves,
            pfi: pfi_vals,
        })
    })?;

    // Importance: [measure][fold][feature]. PDP spread is averaged over
    // the traced classes; PFI losses are already class-agnostic.
    let measure_ids: Vec<String> = imp_measures.iter().map(ImportanceMeasure::id).collect();
    let mut values: Vec<Vec<Vec<f64>>> = Vec::with_capacity(imp_measures.len());
    for m in &imp_measures {
        let mut fold_vals = Vec::with_capacity(folds.len());
        for fold in 0..folds.len() {
            let mut feat_vals = Vec::with_capacity(p);
            for j in 0..p {
                let unit = &units[fold * p + j];
                let v = match m {
                    ImportanceMeasure::Pdp => {
                        unit.pdp.iter().map(pdp_importance).sum::<f64>() / unit.pdp.len() as f64
                    }
                    ImportanceMeasure::Pfi(loss) => {
                        let idx = pfi_losses
                            .iter()
                            .position(|l| l.id == loss.id)
                            .expect("loss registered");
                        unit.pfi[idx]
                    }
                };
                feat_vals.push(v);
            }
            fold_vals.push(feat_vals);
        }
        values.push(fold_vals);
    }
    let imp_table = importance_table(&task.feature_names, &measure_ids, &values, control.n_important);

    // Complexity: per fold, a feature counts as active when its ALE
    // curve moves for any traced class; interaction strength is averaged
    // over the classes.
    let mut records = Vec::with_capacity(folds.len());
    for (fold, ctx) in folds.iter().enumerate() {
        let mut active = vec![false; p];
        let mut ias_sum = 0.0;
        for (c, output) in ctx.outputs.iter().enumerate() {
            let curves: Vec<&EffectCurve> = (0..p).map(|j| &units[fold * p + j].ale[c]).collect();
            let lo = output.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let hi = output.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let range = hi - lo;
            if range > 0.0 {
                for (j, curve) in curves.iter().enumerate() {
                    if curve.range() > SPARSITY_EPSILON * range {
                        active[j] = true;
                    }
                }
            }
            ias_sum += interaction_strength(output, &ctx.table, &curves);
        }
        records.push(ComplexityRecord {
            fold,
            sparsity: active.iter().filter(|&&a| a).count(),
            interaction_strength: ias_sum / ctx.outputs.len() as f64,
        });
    }
    let complexity_agg = aggregate_complexity(&records);
    let complexity = ComplexityParagraph {
        measures: control.complexity_measures.clone(),
        sparsity: control
            .complexity_measures
            .iter()
            .any(|m| m == "sparsity")
            .then(|| AggregateEntry {
                mean: complexity_agg.sparsity_mean,
                sd: complexity_agg.sparsity_sd,
                per_fold: complexity_agg
                    .per_fold
                    .iter()
                    .map(|r| r.sparsity as f64)
                    .collect(),
            }),
        interaction_strength: control
            .complexity_measures
            .iter()
            .any(|m| m == "interaction_strength")
            .then(|| AggregateEntry {
                mean: complexity_agg.interaction_mean,
                sd: complexity_agg.interaction_sd,
                per_fold: complexity_agg
                    .per_fold
                    .iter()
                    .map(|r| r.interaction_strength)
                    .collect(),
            }),
        single_fold: complexity_agg.single_fold,
        warnings: complexity_agg.warnings.clone(),
    };

    // Effects for the ranked features only, aggregated across folds.
    let mut entries = Vec::new();
    for row in &imp_table.rows {
        let j = task
            .feature_names
            .iter()
            .position(|f| f == &row.feature)
            .expect("ranked feature exists");
        for method_id in &control.effect_measures {
            for (c, class) in classes.iter().enumerate() {
                let fold_curves: Vec<EffectCurve> = (0..folds.len())
                    .map(|fold| {
                        let unit = &units[fold * p + j];
                        if method_id == "pdp" {
                            unit.pdp[c].clone()
                        } else {
                            unit.ale[c].clone()
                        }
                    })
                    .collect();
                let agg_curve = aggregate_effects(&fold_curves)?;
                let mut notes = Vec::new();
                for fc in &fold_curves {
                    if !fc.empty_intervals.is_empty() {
                        notes.push(format!(
                            "fold {}: {} empty intervals",
                            fc.fold.unwrap_or(0),
                            fc.empty_intervals.len()
                        ));
                    }
                }
                for ex in &agg_curve.excluded_folds {
                    notes.push(format!("fold {ex} excluded (non-finite values)"));
                }
                let grid = match &grids[j].points {
                    GridPoints::Numeric(pts) => GridJson {
                        kind: "numeric".to_string(),
                        points: Some(pts.clone()),
                        levels: None,
                    },
                    GridPoints::Levels(levels) => GridJson {
                        kind: "levels".to_string(),
                        points: None,
                        levels: Some(levels.clone()),
                    },
                };
                let n_points = agg_curve.values.len();
                entries.push(EffectEntry {
                    feature: row.feature.clone(),
                    method: method_id.clone(),
                    class: class.clone(),
                    grid,
                    mean: agg_curve.values,
                    sd: agg_curve.sd.unwrap_or_else(|| vec![0.0; n_points]),
                    per_fold: fold_curves
                        .iter()
                        .map(|fc| FoldCurve {
                            fold: fc.fold.unwrap_or(0),
                            values: fc.values.clone(),
                        })
                        .collect(),
                    notes,
                });
            }
        }
    }
    let effects = EffectsParagraph {
        methods: control.effect_measures.clone(),
        classes: classes.clone(),
        entries,
    };

    let (numeric, categorical) = task.feature_kind_counts();
    let general = GeneralParagraph {
        target: task.target.clone(),
        task_type: tt.name().to_string(),
        positive_class: positive.and_then(|i| task.class_levels().map(|ls| ls[i].clone())),
        n: task.frame().n_rows(),
        p,
        numeric_features: numeric,
        categorical_features: categorical,
        learner: model.learner.kind.id().to_string(),
        hyperparameters: model
            .learner
            .hyperparameter_summary()
            .into_iter()
            .map(|(name, value)| NameValue { name, value })
            .collect(),
        resampling: rr.strategy.spec_string(),
        iterations: rr.n_iterations(),
        seed: rr.strategy.seed,
    };

    Ok(SummaryReport {
        general,
        residuals: Section::new(control.hidden("residuals"), residuals),
        performance: Section::new(control.hidden("performance"), performance),
        complexity: Section::new(control.hidden("complexity"), complexity),
        fairness,
        importance: Section::new(
            control.hidden("importance"),
            ImportanceParagraph { table: imp_table },
        ),
        effects: Section::new(control.hidden("effects"), effects),
        digits: control.digits,
    })
}

fn performance_paragraph(
    rr: &ResampleResult,
    control: &SummaryControl,
) -> Result<PerformanceParagraph> {
    let specs: Vec<(&'static Measure, AggregationMode)> = match &control.measures {
        Some(specs) => specs
            .iter()
            .map(|s| parse_measure_spec(s))
            .collect::<Result<_>>()?,
        None => default_measures(rr.task.task_type)
            .into_iter()
            .map(|m| (m, AggregationMode::Macro))
            .collect(),
    };
    let entries = specs
        .iter()
        .map(|&(m, mode)| {
            let agg = aggregate(m, mode, rr)?;
            Ok(PerformanceEntry {
                id: agg.id,
                mode: mode.name().to_string(),
                direction: match m.direction {
                    Direction::Maximize => "maximize".to_string(),
                    Direction::Minimize => "minimize".to_string(),
                },
                mean: agg.mean,
                sd: agg.sd,
                per_fold: agg.per_fold,
                notes: agg.notes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PerformanceParagraph { entries })
}

fn residuals_paragraph(rr: &ResampleResult) -> Result<ResidualsParagraph> {
    let probabilistic = rr
        .iterations
        .first()
        .map(|it| it.prediction.probabilities.is_some())
        .unwrap_or(false);
    let kind = residual_kind(rr.task.task_type, probabilistic).to_string();
    match summarize_residuals(rr)? {
        ResidualSummary::Quantiles(q) => Ok(ResidualsParagraph {
            kind,
            quantiles: Some(q),
            confusion: None,
        }),
        ResidualSummary::Confusion(c) => {
            let k = c.n_classes();
            let counts = (0..k)
                .map(|i| (0..k).map(|j| c.get(i, j)).collect())
                .collect();
            Ok(ResidualsParagraph {
                kind,
                quantiles: None,
                confusion: Some(ConfusionJson {
                    levels: c.levels.clone(),
                    counts,
                }),
            })
        }
    }
}

fn fairness_paragraph(
    rr: &ResampleResult,
    control: &SummaryControl,
) -> Result<Option<Section<FairnessParagraph>>> {
    let task = &rr.task;
    let tt = task.task_type;
    let Some(name) = resolve_protected(task, control.protected_attribute.as_deref())? else {
        return Ok(None);
    };
    let measures: Vec<FairnessMeasure> = match &control.fairness_measures {
        Some(ids) => ids
            .iter()
            .map(|id| {
                let m = FairnessMeasure::parse(id)?;
                if !m.applies_to(tt) {
                    return Err(Error::FairnessTaskMismatch {
                        measure: id.clone(),
                        task_type: tt.name().to_string(),
                    });
                }
                Ok(m)
            })
            .collect::<Result<_>>()?,
        None => default_fairness_measures(tt),
    };
    let (codes, levels) = protected_codes(task, &name)?;
    let positive = task.positive_index();
    let entries = measures
        .iter()
        .map(|&m| {
            let folds: Vec<FoldFairness> = rr
                .iterations
                .iter()
                .map(|it| {
                    let truth = task.truth(&it.test);
                    let groups: Vec<u32> = it.test.iter().map(|&r| codes[r]).collect();
                    evaluate_fairness(m, tt, &it.prediction, &truth, positive, &groups, levels)
                })
                .collect();
            let rec = aggregate_fairness(m, &folds);
            FairnessEntry {
                id: rec.id,
                mean: rec.mean,
                sd: rec.sd,
                per_fold: rec.per_fold,
                notes: rec.notes,
            }
        })
        .collect();
    Ok(Some(Section::new(
        control.hidden("fairness"),
        FairnessParagraph {
            protected_attribute: name,
            groups: levels.to_vec(),
            entries,
        },
    )))
}
