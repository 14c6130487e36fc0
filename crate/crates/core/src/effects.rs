//! Feature effect curves: partial dependence (PDP) and accumulated local
//! effects (ALE).
//!
//! Grids are built once per feature from the full task data so that fold
//! curves share support and can be averaged pointwise. Curves are computed
//! on each fold's held-out rows with that fold's model.
//!
//! The numeric ALE construction: rows fall into the interval between the
//! two grid points bracketing their own value (boundary rows to the lower
//! interval), each interval's local effect is the mean prediction change
//! when the feature moves from the interval's lower to its upper grid
//! point, local effects accumulate left to right, and the curve is
//! centered so that its mass-weighted mean is zero. Per-row evaluation
//! (used for centering and for main-effect reconstruction) interpolates
//! the accumulated curve linearly at the row's own value, which makes the
//! main-effect model of an additive predictor exact.

use std::sync::Arc;

use rand::Rng;

use crate::data::{ColumnData, Task, TaskType};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats;
use crate::table::{FeatureTable, TableModel};

/// Default number of grid points for numeric features.
pub const DEFAULT_GRID_SIZE: usize = 20;

/// Held-out row sets larger than this are subsampled before effect and
/// importance computations.
pub const MAX_EFFECT_ROWS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum GridPoints {
    /// Strictly increasing numeric evaluation points.
    Numeric(Vec<f64>),
    /// Categorical levels in declared order.
    Levels(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectGrid {
    pub feature: String,
    pub points: GridPoints,
    /// True when the feature is constant (single-point grid).
    pub degenerate: bool,
}

impl EffectGrid {
    pub fn len(&self) -> usize {
        match &self.points {
            GridPoints::Numeric(g) => g.len(),
            GridPoints::Levels(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn numeric_points(&self) -> Option<&[f64]> {
        match &self.points {
            GridPoints::Numeric(g) => Some(g),
            GridPoints::Levels(_) => None,
        }
    }
}

/// Build the shared evaluation grid for one feature from the full task
/// data: all unique values when there are at most `g` of them, otherwise
/// `g` equidistant points spanning the observed range. Categorical grids
/// are the declared levels.
pub fn build_grid(task: &Task, feature: &str, g: usize) -> Result<EffectGrid> {
    let col = task.feature_column(feature)?;
    match &col.data {
        ColumnData::Numeric(values) => {
            let mut unique = values.clone();
            unique.sort_by(f64::total_cmp);
            unique.dedup();
            if unique.len() == 1 {
                return Ok(EffectGrid {
                    feature: feature.to_string(),
                    points: GridPoints::Numeric(unique),
                    degenerate: true,
                });
            }
            let points = if unique.len() <= g {
                unique
            } else {
                let lo = unique[0];
                let hi = unique[unique.len() - 1];
                let step = (hi - lo) / (g - 1) as f64;
                let mut pts: Vec<f64> = (0..g).map(|i| lo + step * i as f64).collect();
                // Pin the last point to the observed max against rounding.
                pts[g - 1] = hi;
                pts.dedup();
                pts
            };
            Ok(EffectGrid {
                feature: feature.to_string(),
                points: GridPoints::Numeric(points),
                degenerate: false,
            })
        }
        ColumnData::Categorical { levels, .. } => Ok(EffectGrid {
            feature: feature.to_string(),
            points: GridPoints::Levels(levels.clone()),
            degenerate: levels.len() < 2,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EffectMethod {
    Pdp,
    Ale,
}

impl EffectMethod {
    pub fn name(self) -> &'static str {
        match self {
            EffectMethod::Pdp => "pdp",
            EffectMethod::Ale => "ale",
        }
    }
}

/// One effect curve: a value per grid point, for one feature, method,
/// modeled class, and fold (or the cross-fold aggregate).
#[derive(Clone, Debug)]
pub struct EffectCurve {
    pub grid: Arc<EffectGrid>,
    pub method: EffectMethod,
    /// Modeled class, or `response` for regression.
    pub class: String,
    /// Fold id; `None` marks an aggregate curve.
    pub fold: Option<usize>,
    pub values: Vec<f64>,
    /// ALE only: centering mass per grid point. Numeric curves carry
    /// interpolation weights (fractional); categorical curves carry row
    /// counts per level.
    pub node_mass: Vec<f64>,
    /// ALE only: rows assigned to the interval ending at each grid point
    /// (numeric) or sitting at each level (categorical).
    pub interval_counts: Vec<usize>,
    /// Grid indices of intervals or levels with no rows.
    pub empty_intervals: Vec<usize>,
    /// Aggregate curves: pointwise sample sd across folds.
    pub sd: Option<Vec<f64>>,
    /// Aggregate curves: folds dropped for non-finite values.
    pub excluded_folds: Vec<usize>,
}

impl EffectCurve {
    fn new(grid: Arc<EffectGrid>, method: EffectMethod, class: &str, fold: usize) -> EffectCurve {
        EffectCurve {
            grid,
            method,
            class: class.to_string(),
            fold: Some(fold),
            values: Vec::new(),
            node_mass: Vec::new(),
            interval_counts: Vec::new(),
            empty_intervals: Vec::new(),
            sd: None,
            excluded_folds: Vec::new(),
        }
    }

    pub fn feature(&self) -> &str {
        &self.grid.feature
    }

    /// Curve range (max minus min value).
    pub fn range(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if self.values.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }

    /// Evaluate the curve at a raw feature value: linear interpolation of
    /// the grid values for numeric features, direct lookup for levels.
    pub fn value_at(&self, x: f64) -> f64 {
        match &self.grid.points {
            GridPoints::Levels(_) => self.values[x as usize],
            GridPoints::Numeric(g) => {
                if g.len() == 1 {
                    return self.values[0];
                }
                let (k, w) = locate(g, x);
                (1.0 - w) * self.values[k - 1] + w * self.values[k]
            }
        }
    }
}

/// Interval of `x` in a strictly increasing grid: the index `k >= 1` of
/// the interval's upper point, and the interpolation weight toward it.
/// Boundary values belong to the lower interval; values at or below the
/// first grid point get `k = 1` with weight 0.
fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let k = grid
        .partition_point(|&g| g < x)
        .clamp(1, grid.len() - 1);
    let w = ((x - grid[k - 1]) / (grid[k] - grid[k - 1])).clamp(0.0, 1.0);
    (k, w)
}

/// Partial dependence: for each grid value, overwrite the feature column
/// in every held-out row and average the predictions. Sums run left to
/// right over rows, so the result is bit-identical to averaging per-row
/// predictions in row order.
pub fn pdp<M: TableModel + ?Sized>(
    model: &M,
    table: &FeatureTable,
    grid: &Arc<EffectGrid>,
    class: &str,
    fold: usize,
) -> Result<EffectCurve> {
    let j = table
        .feature_index(&grid.feature)
        .ok_or_else(|| Error::MissingFeature(grid.feature.clone()))?;
    let n = table.n_rows();
    if n == 0 {
        return Err(Error::EmptyTask);
    }
    let mut scratch = table.clone();
    let mut curve = EffectCurve::new(Arc::clone(grid), EffectMethod::Pdp, class, fold);
    for point in 0..grid.len() {
        let raw = match &grid.points {
            GridPoints::Numeric(g) => g[point],
            GridPoints::Levels(_) => point as f64,
        };
        scratch.fill_column(j, raw);
        let pred = model.predict_table(&scratch);
        let mut sum = 0.0;
        for p in &pred {
            sum += p;
        }
        curve.values.push(sum / n as f64);
    }
    Ok(curve)
}

/// Accumulated local effects on the held-out rows. See the module notes
/// for the exact construction.
pub fn ale<M: TableModel + ?Sized>(
    model: &M,
    table: &FeatureTable,
    grid: &Arc<EffectGrid>,
    class: &str,
    fold: usize,
) -> Result<EffectCurve> {
    let j = table
        .feature_index(&grid.feature)
        .ok_or_else(|| Error::MissingFeature(grid.feature.clone()))?;
    let n = table.n_rows();
    if n == 0 {
        return Err(Error::EmptyTask);
    }
    let mut curve = EffectCurve::new(Arc::clone(grid), EffectMethod::Ale, class, fold);
    let g_len = grid.len();
    if grid.degenerate || g_len < 2 {
        curve.values = vec![0.0; g_len];
        curve.node_mass = vec![n as f64; g_len.min(1)];
        curve.interval_counts = vec![n; g_len.min(1)];
        return Ok(curve);
    }

    let x = table.column(j);
    match &grid.points {
        GridPoints::Numeric(g) => {
            // One batch prediction at each row's interval bounds.
            let placements: Vec<(usize, f64)> = x.iter().map(|&v| locate(g, v)).collect();
            let upper: Vec<f64> = placements.iter().map(|&(k, _)| g[k]).collect();
            let lower: Vec<f64> = placements.iter().map(|&(k, _)| g[k - 1]).collect();
            let mut scratch = table.clone();
            scratch.set_column(j, &upper);
            let f_hi = model.predict_table(&scratch);
            scratch.set_column(j, &lower);
            let f_lo = model.predict_table(&scratch);

            let mut local_sum = vec![0.0; g_len];
            let mut counts = vec![0usize; g_len];
            for (i, &(k, _)) in placements.iter().enumerate() {
                local_sum[k] += f_hi[i] - f_lo[i];
                counts[k] += 1;
            }
            // Accumulate mean local effects; empty intervals add zero.
            let mut accumulated = vec![0.0; g_len];
            for k in 1..g_len {
                let local = if counts[k] == 0 {
                    curve.empty_intervals.push(k);
                    0.0
                } else {
                    local_sum[k] / counts[k] as f64
                };
                accumulated[k] = accumulated[k - 1] + local;
            }
            // Center at the mean of per-row interpolated values; the mass
            // vector records each grid point's share of that mean so the
            // weighted-mean-zero invariant holds exactly.
            let mut mass = vec![0.0; g_len];
            let mut total = 0.0;
            for &(k, w) in &placements {
                mass[k - 1] += 1.0 - w;
                mass[k] += w;
                total += (1.0 - w) * accumulated[k - 1] + w * accumulated[k];
            }
            let center = total / n as f64;
            curve.values = accumulated.iter().map(|a| a - center).collect();
            curve.node_mass = mass;
            curve.interval_counts = counts;
        }
        GridPoints::Levels(_) => {
            // Rows grouped by their own level; step k moves level k-1 to k
            // averaged over the rows sitting at level k.
            let mut counts = vec![0usize; g_len];
            for &v in &x {
                counts[v as usize] += 1;
            }
            let mut scratch = table.clone();
            let mut accumulated = vec![0.0; g_len];
            // Predictions with everyone at level k, reused as the lower
            // table of step k+1.
            scratch.fill_column(j, 0.0);
            let mut f_at_prev = model.predict_table(&scratch);
            for k in 1..g_len {
                scratch.fill_column(j, k as f64);
                let f_at_k = model.predict_table(&scratch);
                if counts[k] == 0 {
                    curve.empty_intervals.push(k);
                    accumulated[k] = accumulated[k - 1];
                } else {
                    let mut local = 0.0;
                    for (i, &v) in x.iter().enumerate() {
                        if v as usize == k {
                            local += f_at_k[i] - f_at_prev[i];
                        }
                    }
                    accumulated[k] = accumulated[k - 1] + local / counts[k] as f64;
                }
                f_at_prev = f_at_k;
            }
            let total: f64 = x.iter().map(|&v| accumulated[v as usize]).sum();
            let center = total / n as f64;
            curve.values = accumulated.iter().map(|a| a - center).collect();
            curve.node_mass = counts.iter().map(|&c| c as f64).collect();
            curve.interval_counts = counts;
        }
    }
    Ok(curve)
}

/// Pointwise mean (and sample sd) of fold curves. Curves are matched on
/// grid, method, and class; fold order does not matter. Folds with
/// non-finite values are excluded and recorded.
pub fn aggregate_effects(curves: &[EffectCurve]) -> Result<EffectCurve> {
    if curves.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    let first = &curves[0];
    for c in curves {
        if c.grid != first.grid || c.method != first.method || c.class != first.class {
            return Err(Error::GridMismatch(c.grid.feature.clone()));
        }
    }
    // Fixed processing order regardless of the caller's fold order.
    let mut order: Vec<&EffectCurve> = curves.iter().collect();
    order.sort_by_key(|c| c.fold);

    let mut included: Vec<&EffectCurve> = Vec::new();
    let mut excluded_folds = Vec::new();
    for c in order {
        if c.values.iter().all(|v| v.is_finite()) {
            included.push(c);
        } else {
            excluded_folds.push(c.fold.unwrap_or(usize::MAX));
        }
    }
    if included.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    let g_len = first.values.len();
    let mut values = Vec::with_capacity(g_len);
    let mut sd = Vec::with_capacity(g_len);
    for point in 0..g_len {
        let at_point: Vec<f64> = included.iter().map(|c| c.values[point]).collect();
        values.push(stats::mean(&at_point));
        sd.push(stats::sample_sd(&at_point).unwrap_or(0.0));
    }
    Ok(EffectCurve {
        grid: Arc::clone(&first.grid),
        method: first.method,
        class: first.class.clone(),
        fold: None,
        values,
        node_mass: Vec::new(),
        interval_counts: Vec::new(),
        empty_intervals: Vec::new(),
        sd: Some(sd),
        excluded_folds,
    })
}

/// Output classes effect curves are traced for: the positive class for
/// binary tasks, every class for multiclass, `response` for regression.
pub fn effect_classes(task: &Task) -> Vec<String> {
    match task.task_type {
        TaskType::Regression => vec!["response".to_string()],
        TaskType::Binary => vec![task
            .positive_class
            .clone()
            .expect("binary task has a positive class")],
        TaskType::Multiclass => task
            .class_levels()
            .expect("classification task has levels")
            .to_vec(),
    }
}

/// Cap a fold's row set for effect computations: row sets above `max`
/// are reduced to a seeded without-replacement sample, re-sorted into
/// ascending order.
pub fn cap_rows(rows: &[usize], max: usize, seed: u64) -> Vec<usize> {
    if rows.len() <= max {
        return rows.to_vec();
    }
    let mut rng = seed::rng(seed);
    let mut pool = rows.to_vec();
    for i in 0..max {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut picked = pool[..max].to_vec();
    picked.sort_unstable();
    picked
}
