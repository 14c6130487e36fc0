//! Random forest: bagged trees with per-node feature subsampling.

use rand::Rng;

use super::tree::{self, TreeModel, TreeSettings};
use crate::data::Truth;
use crate::seed;
use crate::table::FeatureTable;

#[derive(Clone, Debug)]
pub struct ForestModel {
    pub(crate) trees: Vec<TreeModel>,
    pub(crate) n_classes: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct ForestSettings {
    pub num_trees: usize,
    pub mtry: usize,
    pub bootstrap: bool,
    pub max_depth: usize,
    pub min_leaf: usize,
}

/// Fit `num_trees` trees. Tree `t` draws its bootstrap sample and all of
/// its feature subsets from a stream derived as `derive_path(seed, [t])`,
/// so the forest is reproducible regardless of scheduling.
pub(crate) fn fit(
    table: &FeatureTable,
    y: &Truth,
    n_classes: usize,
    settings: ForestSettings,
    seed: u64,
) -> ForestModel {
    let n = table.n_rows();
    let tree_settings = TreeSettings {
        max_depth: settings.max_depth,
        min_leaf: settings.min_leaf,
        mtry: settings.mtry,
    };
    let trees = (0..settings.num_trees)
        .map(|t| {
            let mut rng = seed::rng(seed::derive_path(seed, &[t as u64]));
            let rows: Vec<usize> = if settings.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            tree::fit_rows(table, rows, y, n_classes, tree_settings, Some(rng))
        })
        .collect();
    ForestModel { trees, n_classes }
}

impl ForestModel {
    pub(crate) fn predict_response(&self, table: &FeatureTable) -> Vec<f64> {
        let mut acc = vec![0.0; table.n_rows()];
        for tree in &self.trees {
            tree.accumulate_response(table, &mut acc);
        }
        let m = self.trees.len() as f64;
        acc.iter_mut().for_each(|v| *v /= m);
        acc
    }

    /// Row-major probabilities averaged over the trees' leaf proportions.
    pub(crate) fn predict_probs(&self, table: &FeatureTable) -> Vec<f64> {
        let mut acc = vec![0.0; table.n_rows() * self.n_classes];
        for tree in &self.trees {
            tree.accumulate_probs(table, &mut acc);
        }
        let m = self.trees.len() as f64;
        acc.iter_mut().for_each(|v| *v /= m);
        acc
    }

    pub(crate) fn num_trees(&self) -> usize {
        self.trees.len()
    }
}
