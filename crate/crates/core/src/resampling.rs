//! Resampling strategies and the resample loop.
//!
//! `resample` fits one model per train/test split, keeps the fitted models
//! and held-out predictions, and times each iteration. Fold seeds are
//! derived from the strategy seed by counter mixing, so runs are
//! bitwise-identical no matter how many workers execute them.

use std::time::Instant;

use rand::seq::SliceRandom;

use crate::data::{ColumnData, Task};
use crate::error::{Error, Result};
use crate::exec;
use crate::learner::{self, FittedModel, Learner, Prediction};
use crate::seed::{self, TAG_FIT, TAG_SPLIT};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResamplingKind {
    Cv { folds: usize },
    Holdout { ratio: f64 },
    Subsampling { ratio: f64, repeats: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResamplingStrategy {
    pub kind: ResamplingKind,
    pub seed: u64,
    /// Stratify cv folds by the target for classification tasks.
    pub stratify: bool,
}

impl ResamplingStrategy {
    pub fn new(kind: ResamplingKind, seed: u64) -> ResamplingStrategy {
        ResamplingStrategy {
            kind,
            seed,
            stratify: true,
        }
    }

    /// Parse strings like `cv3`, `holdout`, `holdout:0.66`, or
    /// `subsampling:0.66x10`.
    pub fn parse(spec: &str, seed: u64) -> Result<ResamplingStrategy> {
        Ok(ResamplingStrategy::new(parse_kind(spec)?, seed))
    }

    pub fn spec_string(&self) -> String {
        match self.kind {
            ResamplingKind::Cv { folds } => format!("cv{folds}"),
            ResamplingKind::Holdout { ratio } => format!("holdout:{ratio}"),
            ResamplingKind::Subsampling { ratio, repeats } => {
                format!("subsampling:{ratio}x{repeats}")
            }
        }
    }

    pub fn n_iterations(&self) -> usize {
        match self.kind {
            ResamplingKind::Cv { folds } => folds,
            ResamplingKind::Holdout { .. } => 1,
            ResamplingKind::Subsampling { repeats, .. } => repeats,
        }
    }
}

fn parse_kind(spec: &str) -> Result<ResamplingKind> {
    if let Some(rest) = spec.strip_prefix("cv") {
        let folds = if rest.is_empty() {
            3
        } else {
            rest.parse::<usize>()
                .map_err(|_| Error::ResamplingSpec(format!("bad fold count in {spec}")))?
        };
        if folds < 2 {
            return Err(Error::ResamplingSpec(format!(
                "cv needs at least 2 folds, got {folds}"
            )));
        }
        return Ok(ResamplingKind::Cv { folds });
    }
    if let Some(rest) = spec.strip_prefix("holdout") {
        let ratio = match rest.strip_prefix(':') {
            None if rest.is_empty() => 2.0 / 3.0,
            Some(r) => r
                .parse::<f64>()
                .map_err(|_| Error::ResamplingSpec(format!("bad ratio in {spec}")))?,
            None => return Err(Error::ResamplingSpec(format!("unknown strategy {spec}"))),
        };
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::ResamplingSpec(format!(
                "holdout ratio must be in (0, 1), got {ratio}"
            )));
        }
        return Ok(ResamplingKind::Holdout { ratio });
    }
    if let Some(rest) = spec.strip_prefix("subsampling") {
        let (ratio, repeats) = match rest.strip_prefix(':') {
            None if rest.is_empty() => (2.0 / 3.0, 10),
            Some(r) => {
                let (ratio, repeats) = r.split_once('x').ok_or_else(|| {
                    Error::ResamplingSpec(format!("expected ratio x repeats in {spec}"))
                })?;
                (
                    ratio.parse::<f64>().map_err(|_| {
                        Error::ResamplingSpec(format!("bad ratio in {spec}"))
                    })?,
                    repeats.parse::<usize>().map_err(|_| {
                        Error::ResamplingSpec(format!("bad repeat count in {spec}"))
                    })?,
                )
            }
            None => return Err(Error::ResamplingSpec(format!("unknown strategy {spec}"))),
        };
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::ResamplingSpec(format!(
                "subsampling ratio must be in (0, 1), got {ratio}"
            )));
        }
        if repeats < 1 {
            return Err(Error::ResamplingSpec("repeats must be at least 1".into()));
        }
        return Ok(ResamplingKind::Subsampling { ratio, repeats });
    }
    Err(Error::ResamplingSpec(format!("unknown strategy {spec}")))
}

/// Train/test index pairs plus any warnings raised while planning them.
#[derive(Clone, Debug)]
pub struct SplitPlan {
    pub splits: Vec<(Vec<usize>, Vec<usize>)>,
    pub warnings: Vec<String>,
}

/// Plan the train/test splits for a task.
///
/// Cross-validation deals shuffled rows round-robin, so fold sizes differ
/// by at most one. For classification (with `stratify` on) each class is
/// dealt separately with a rotating fold offset, keeping per-fold class
/// counts within one row of the ideal proportion; a class smaller than the
/// fold count disables stratification with a warning.
pub fn split(strategy: &ResamplingStrategy, task: &Task) -> Result<SplitPlan> {
    let n = task.n();
    let mut warnings = Vec::new();
    let splits = match strategy.kind {
        ResamplingKind::Cv { folds } => {
            if n < folds {
                return Err(Error::TooFewRows { n, k: folds });
            }
            let mut rng = seed::rng(seed::derive_path(strategy.seed, &[TAG_SPLIT]));
            let class_codes = match &task.target_column().data {
                ColumnData::Categorical { codes, levels } if strategy.stratify => {
                    let mut counts = vec![0usize; levels.len()];
                    for &c in codes {
                        counts[c as usize] += 1;
                    }
                    match counts.iter().enumerate().find(|(_, &c)| c < folds) {
                        Some((small, _)) => {
                            warnings.push(format!(
                                "class {} has fewer rows than folds; stratification disabled",
                                levels[small]
                            ));
                            None
                        }
                        None => Some((codes, levels.len())),
                    }
                }
                _ => None,
            };

            let mut fold_rows: Vec<Vec<usize>> = vec![Vec::new(); folds];
            match class_codes {
                Some((codes, n_levels)) => {
                    let mut offset = 0;
                    for class in 0..n_levels {
                        let mut rows: Vec<usize> =
                            (0..n).filter(|&r| codes[r] as usize == class).collect();
                        rows.shuffle(&mut rng);
                        for (i, row) in rows.iter().enumerate() {
                            fold_rows[(offset + i) % folds].push(*row);
                        }
                        offset = (offset + rows.len()) % folds;
                    }
                }
                None => {
                    let mut rows: Vec<usize> = (0..n).collect();
                    rows.shuffle(&mut rng);
                    for (i, row) in rows.iter().enumerate() {
                        fold_rows[i % folds].push(*row);
                    }
                }
            }

            fold_rows
                .into_iter()
                .map(|mut test| {
                    test.sort_unstable();
                    let mut in_test = vec![false; n];
                    for &r in &test {
                        in_test[r] = true;
                    }
                    let train = (0..n).filter(|&r| !in_test[r]).collect();
                    (train, test)
                })
                .collect()
        }
        ResamplingKind::Holdout { ratio } => {
            vec![shuffled_holdout(
                n,
                ratio,
                seed::derive_path(strategy.seed, &[TAG_SPLIT]),
            )]
        }
        ResamplingKind::Subsampling { ratio, repeats } => (0..repeats)
            .map(|r| {
                shuffled_holdout(
                    n,
                    ratio,
                    seed::derive_path(strategy.seed, &[TAG_SPLIT, r as u64]),
                )
            })
            .collect(),
    };
    Ok(SplitPlan { splits, warnings })
}

/// One shuffled train/test split with `round(ratio * n)` training rows.
fn shuffled_holdout(n: usize, ratio: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seed::rng(seed);
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    let n_train = ((ratio * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let mut train = rows[..n_train].to_vec();
    let mut test = rows[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// One fitted fold: model, indices, held-out predictions, wall time.
#[derive(Clone, Debug)]
pub struct ResampleIteration {
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Dropped by [`ResampleResult::without_models`].
    pub model: Option<FittedModel>,
    pub prediction: Prediction,
    /// Fit plus predict time in seconds.
    pub wall: f64,
}

#[derive(Clone, Debug)]
pub struct ResampleResult {
    pub task: Task,
    pub learner: Learner,
    pub strategy: ResamplingStrategy,
    pub iterations: Vec<ResampleIteration>,
    pub warnings: Vec<String>,
}

impl ResampleResult {
    /// Copy without fitted models, as a result would look when model
    /// storage was turned off.
    pub fn without_models(&self) -> ResampleResult {
        let mut out = self.clone();
        for it in &mut out.iterations {
            it.model = None;
        }
        out
    }

    pub fn n_iterations(&self) -> usize {
        self.iterations.len()
    }
}

/// Fit the learner under the strategy. Iteration `i` derives its seed from
/// the strategy seed and `i`, so results do not depend on `workers`.
pub fn resample(
    task: &Task,
    learner: &Learner,
    strategy: &ResamplingStrategy,
    workers: usize,
) -> Result<ResampleResult> {
    let plan = split(strategy, task)?;
    let splits = plan.splits;
    let iterations = exec::try_run_indexed(workers, splits.len(), |i| {
        let (train, test) = &splits[i];
        let start = Instant::now();
        let fold_seed = seed::derive_path(strategy.seed, &[TAG_FIT, i as u64]);
        let model = learner::fit(learner, task, train, fold_seed).map_err(|e| e.in_fold(i))?;
        let prediction = model.predict_task(task, test).map_err(|e| e.in_fold(i))?;
        Ok(ResampleIteration {
            fold: i,
            train: train.clone(),
            test: test.clone(),
            model: Some(model),
            prediction,
            wall: start.elapsed().as_secs_f64(),
        })
    })?;
    Ok(ResampleResult {
        task: task.clone(),
        learner: learner.clone(),
        strategy: *strategy,
        iterations,
        warnings: plan.warnings,
    })
}
