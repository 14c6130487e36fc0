//! Classification and regression tree with binary splits.
//!
//! Numeric features split at midpoints between distinct sorted values;
//! categorical features split one level against the rest. Split quality is
//! the decrease in count-weighted Gini impurity (classification) or in the
//! sum of squared errors (regression). There is no pruning; growth stops at
//! `max_depth`, at `min_leaf`, or when no split improves the score by more
//! than 1e-12. Ties are broken by the first candidate found scanning
//! features in ascending index order and split points in ascending value
//! or level order, which makes trees fully deterministic.

use rand_chacha::ChaCha8Rng;

use crate::data::{ColumnKind, Truth};
use crate::table::FeatureTable;

const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum SplitRule {
    /// Left branch when `value <= threshold`.
    Numeric { feature: usize, threshold: f64 },
    /// Left branch when the level code equals `level`.
    Level { feature: usize, level: u32 },
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub rule: Option<SplitRule>,
    pub left: usize,
    pub right: usize,
    /// Regression: `[mean]`. Classification: class proportions.
    pub value: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TreeModel {
    pub(crate) nodes: Vec<Node>,
    /// 0 for regression trees.
    pub(crate) n_classes: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct TreeSettings {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Number of features drawn per node; equal to the feature count when
    /// no subsetting is wanted.
    pub mtry: usize,
}

pub(crate) fn fit(
    table: &FeatureTable,
    y: &Truth,
    n_classes: usize,
    settings: TreeSettings,
    rng: Option<ChaCha8Rng>,
) -> TreeModel {
    let mut builder = Builder {
        table,
        y,
        n_classes,
        settings,
        rng,
        nodes: Vec::new(),
    };
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    builder.build(rows, 0);
    TreeModel {
        nodes: builder.nodes,
        n_classes,
    }
}

/// Fit on an explicit row multiset (bootstrap samples repeat rows).
pub(crate) fn fit_rows(
    table: &FeatureTable,
    rows: Vec<usize>,
    y: &Truth,
    n_classes: usize,
    settings: TreeSettings,
    rng: Option<ChaCha8Rng>,
) -> TreeModel {
    let mut builder = Builder {
        table,
        y,
        n_classes,
        settings,
        rng,
        nodes: Vec::new(),
    };
    builder.build(rows, 0);
    TreeModel {
        nodes: builder.nodes,
        n_classes,
    }
}

struct Builder<'a> {
    table: &'a FeatureTable,
    y: &'a Truth,
    n_classes: usize,
    settings: TreeSettings,
    rng: Option<ChaCha8Rng>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(Node {
            rule: None,
            left: 0,
            right: 0,
            value: self.leaf_value(&rows),
        });
        if depth >= self.settings.max_depth || rows.len() < 2 * self.settings.min_leaf {
            return idx;
        }
        if let Some(rule) = self.best_split(&rows) {
            let (left_rows, right_rows) = partition(self.table, &rows, &rule);
            let left = self.build(left_rows, depth + 1);
            let right = self.build(right_rows, depth + 1);
            let node = &mut self.nodes[idx];
            node.rule = Some(rule);
            node.left = left;
            node.right = right;
        }
        idx
    }

    fn leaf_value(&self, rows: &[usize]) -> Vec<f64> {
        match self.y {
            Truth::Values(v) => {
                let sum: f64 = rows.iter().map(|&r| v[r]).sum();
                vec![sum / rows.len() as f64]
            }
            Truth::Classes(codes) => {
                let mut counts = vec![0.0; self.n_classes];
                for &r in rows {
                    counts[codes[r] as usize] += 1.0;
                }
                let n = rows.len() as f64;
                counts.iter_mut().for_each(|c| *c /= n);
                counts
            }
        }
    }

    /// Candidate features for one node, ascending. Subsets of size `mtry`
    /// are drawn without replacement and re-sorted so that the tie-break
    /// scan order stays ascending.
    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.table.n_features();
        let mtry = self.settings.mtry.min(p);
        match &mut self.rng {
            Some(rng) if mtry < p => {
                use rand::Rng;
                let mut pool: Vec<usize> = (0..p).collect();
                for i in 0..mtry {
                    let j = rng.random_range(i..p);
                    pool.swap(i, j);
                }
                let mut picked = pool[..mtry].to_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..p).collect(),
        }
    }

    /// The score of a row set is sum(count^2)/n for classification and
    /// sum(y)^2/n for regression; a split's gain is the score increase of
    /// the children over the parent, which equals the count-weighted Gini
    /// or SSE decrease.
    fn best_split(&mut self, rows: &[usize]) -> Option<SplitRule> {
        let min_leaf = self.settings.min_leaf.max(1);
        let features = self.candidate_features();
        let parent = self.score(rows);
        let mut best_gain = MIN_GAIN;
        let mut best_rule = None;
        for j in features {
            let candidate = match self.table.schema()[j].kind {
                ColumnKind::Numeric => self.best_numeric_split(rows, j, min_leaf, parent),
                ColumnKind::Categorical => self.best_level_split(rows, j, min_leaf, parent),
            };
            if let Some((gain, rule)) = candidate {
                if gain > best_gain {
                    best_gain = gain;
                    best_rule = Some(rule);
                }
            }
        }
        best_rule
    }

    fn score(&self, rows: &[usize]) -> f64 {
        match self.y {
            Truth::Values(v) => {
                let sum: f64 = rows.iter().map(|&r| v[r]).sum();
                sum * sum / rows.len() as f64
            }
            Truth::Classes(codes) => {
                let mut counts = vec![0.0f64; self.n_classes];
                for &r in rows {
                    counts[codes[r] as usize] += 1.0;
                }
                counts.iter().map(|c| c * c).sum::<f64>() / rows.len() as f64
            }
        }
    }

    fn best_numeric_split(
        &self,
        rows: &[usize],
        feature: usize,
        min_leaf: usize,
        parent: f64,
    ) -> Option<(f64, SplitRule)> {
        let n = rows.len();
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| {
            self.table
                .get(a, feature)
                .total_cmp(&self.table.get(b, feature))
        });

        let mut best: Option<(f64, SplitRule)> = None;
        let consider = |gain: f64, threshold: f64, best: &mut Option<(f64, SplitRule)>| {
            if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                *best = Some((gain, SplitRule::Numeric { feature, threshold }));
            }
        };

        match self.y {
            Truth::Values(v) => {
                let total: f64 = order.iter().map(|&r| v[r]).sum();
                let mut left_sum = 0.0;
                for i in 1..n {
                    left_sum += v[order[i - 1]];
                    let prev = self.table.get(order[i - 1], feature);
                    let cur = self.table.get(order[i], feature);
                    if prev == cur || i < min_leaf || n - i < min_leaf {
                        continue;
                    }
                    let threshold = split_point(prev, cur);
                    let right_sum = total - left_sum;
                    let score = left_sum * left_sum / i as f64
                        + right_sum * right_sum / (n - i) as f64;
                    consider(score - parent, threshold, &mut best);
                }
            }
            Truth::Classes(codes) => {
                let mut left = vec![0.0f64; self.n_classes];
                let mut total = vec![0.0f64; self.n_classes];
                for &r in &order {
                    total[codes[r] as usize] += 1.0;
                }
                let total_sq: f64 = total.iter().map(|c| c * c).sum();
                let mut left_sq = 0.0;
                let mut right_sq = total_sq;
                for i in 1..n {
                    let c = codes[order[i - 1]] as usize;
                    // Incremental sum-of-squares updates for one moved row.
                    left_sq += 2.0 * left[c] + 1.0;
                    right_sq += 1.0 - 2.0 * (total[c] - left[c]);
                    left[c] += 1.0;
                    total[c] -= 1.0;
                    let prev = self.table.get(order[i - 1], feature);
                    let cur = self.table.get(order[i], feature);
                    if prev == cur || i < min_leaf || n - i < min_leaf {
                        continue;
                    }
                    let threshold = split_point(prev, cur);
                    let score = left_sq / i as f64 + right_sq / (n - i) as f64;
                    consider(score - parent, threshold, &mut best);
                }
            }
        }
        best.filter(|(g, _)| *g > MIN_GAIN)
    }

    fn best_level_split(
        &self,
        rows: &[usize],
        feature: usize,
        min_leaf: usize,
        parent: f64,
    ) -> Option<(f64, SplitRule)> {
        let n_levels = self.table.schema()[feature].n_levels();
        let n = rows.len();
        let mut best: Option<(f64, SplitRule)> = None;
        match self.y {
            Truth::Values(v) => {
                let mut count = vec![0usize; n_levels];
                let mut sum = vec![0.0f64; n_levels];
                let mut total = 0.0;
                for &r in rows {
                    let l = self.table.get(r, feature) as usize;
                    count[l] += 1;
                    sum[l] += v[r];
                    total += v[r];
                }
                for level in 0..n_levels {
                    let n_l = count[level];
                    if n_l < min_leaf || n - n_l < min_leaf {
                        continue;
                    }
                    let right = total - sum[level];
                    let score = sum[level] * sum[level] / n_l as f64
                        + right * right / (n - n_l) as f64;
                    let gain = score - parent;
                    if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                        best = Some((
                            gain,
                            SplitRule::Level {
                                feature,
                                level: level as u32,
                            },
                        ));
                    }
                }
            }
            Truth::Classes(codes) => {
                let k = self.n_classes;
                let mut count = vec![0usize; n_levels];
                let mut by_level = vec![0.0f64; n_levels * k];
                let mut total = vec![0.0f64; k];
                for &r in rows {
                    let l = self.table.get(r, feature) as usize;
                    let c = codes[r] as usize;
                    count[l] += 1;
                    by_level[l * k + c] += 1.0;
                    total[c] += 1.0;
                }
                for level in 0..n_levels {
                    let n_l = count[level];
                    if n_l < min_leaf || n - n_l < min_leaf {
                        continue;
                    }
                    let mut left_sq = 0.0;
                    let mut right_sq = 0.0;
                    for c in 0..k {
                        let lc = by_level[level * k + c];
                        left_sq += lc * lc;
                        let rc = total[c] - lc;
                        right_sq += rc * rc;
                    }
                    let score = left_sq / n_l as f64 + right_sq / (n - n_l) as f64;
                    let gain = score - parent;
                    if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                        best = Some((
                            gain,
                            SplitRule::Level {
                                feature,
                                level: level as u32,
                            },
                        ));
                    }
                }
            }
        }
        best.filter(|(g, _)| *g > MIN_GAIN)
    }
}

/// Midpoint between two distinct values, nudged down when rounding would
/// land it on the upper value so that `x <= threshold` keeps the sorted
/// prefix exactly.
fn split_point(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

fn partition(table: &FeatureTable, rows: &[usize], rule: &SplitRule) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &r in rows {
        if goes_left(table, r, rule) {
            left.push(r);
        } else {
            right.push(r);
        }
    }
    (left, right)
}

fn goes_left(table: &FeatureTable, row: usize, rule: &SplitRule) -> bool {
    match rule {
        SplitRule::Numeric { feature, threshold } => table.get(row, *feature) <= *threshold,
        SplitRule::Level { feature, level } => table.get(row, *feature) as u32 == *level,
    }
}

impl TreeModel {
    fn leaf_of(&self, table: &FeatureTable, row: usize) -> &Node {
        let mut node = &self.nodes[0];
        while let Some(rule) = &node.rule {
            node = if goes_left(table, row, rule) {
                &self.nodes[node.left]
            } else {
                &self.nodes[node.right]
            };
        }
        node
    }

    pub(crate) fn predict_response(&self, table: &FeatureTable) -> Vec<f64> {
        (0..table.n_rows())
            .map(|i| self.leaf_of(table, i).value[0])
            .collect()
    }

    /// Row-major class proportions.
    pub(crate) fn predict_probs(&self, table: &FeatureTable) -> Vec<f64> {
        let mut out = Vec::with_capacity(table.n_rows() * self.n_classes);
        for i in 0..table.n_rows() {
            out.extend_from_slice(&self.leaf_of(table, i).value);
        }
        out
    }

    /// Accumulate predictions into `acc` (used for forest averaging).
    pub(crate) fn accumulate_probs(&self, table: &FeatureTable, acc: &mut [f64]) {
        for i in 0..table.n_rows() {
            let v = &self.leaf_of(table, i).value;
            for (a, b) in acc[i * self.n_classes..(i + 1) * self.n_classes]
                .iter_mut()
                .zip(v)
            {
                *a += b;
            }
        }
    }

    pub(crate) fn accumulate_response(&self, table: &FeatureTable, acc: &mut [f64]) {
        for i in 0..table.n_rows() {
            acc[i] += self.leaf_of(table, i).value[0];
        }
    }
}
