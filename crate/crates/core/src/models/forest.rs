use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{check_data, grow_tree, TreeNode, TreeParams};
use super::{round_label, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            tree: TreeParams::default(),
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_trees == 0 {
            return Err(ModelError::InvalidParams("n_trees must be at least 1".into()));
        }
        self.tree.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub params: ForestParams,
    pub n_features: usize,
    pub trees: Vec<TreeNode>,
    /// Normalised impurity decrease per feature; all zero if no tree split.
    pub importances: Vec<f64>,
}

/// Bagged regression trees; each tree sees a bootstrap sample and its own
/// seed drawn from the master seed.
pub fn fit_forest(x: &[Vec<f64>], y: &[f64], params: &ForestParams) -> Result<Forest, ModelError> {
    let n_features = check_data(x, y.len())?;
    params.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let n = x.len();
    let trees: Vec<TreeNode> = (0..params.n_trees)
        .map(|_| {
            let tree_seed = master.next_u64();
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow_tree(x, y, rows, &params.tree, rng.next_u64())
        })
        .collect();
    let mut importances = vec![0.0; n_features];
    for tree in &trees {
        tree.accumulate_importance(&mut importances);
    }
    normalize(&mut importances);
    Ok(Forest {
        params: *params,
        n_features,
        trees,
        importances,
    })
}

pub(crate) fn normalize(values: &mut [f64]) {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        values.iter_mut().for_each(|v| *v /= total);
    } else {
        values.iter_mut().for_each(|v| *v = 0.0);
    }
}

impl Forest {
    /// Mean of the tree predictions.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict_label(&self, x: &[f64]) -> u8 {
        round_label(self.predict(x))
    }

    /// True when at least one tree split.
    pub fn has_splits(&self) -> bool {
        self.trees.iter().any(|t| matches!(t, TreeNode::Split { .. }))
    }
}
