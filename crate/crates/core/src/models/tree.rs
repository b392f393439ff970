use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ModelError;

/// How many features a split may look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    All,
    /// Square root of the feature count, rounded.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let n = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().round() as usize,
            MaxFeatures::Count(c) => c,
        };
        n.clamp(1, n_features.max(1))
    }
}

impl std::fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaxFeatures::All => f.write_str("all"),
            MaxFeatures::Sqrt => f.write_str("sqrt"),
            MaxFeatures::Count(c) => write!(f, "{c}"),
        }
    }
}

impl std::str::FromStr for MaxFeatures {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "all" => Ok(MaxFeatures::All),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            other => other
                .parse::<usize>()
                .ok()
                .filter(|&c| c > 0)
                .map(MaxFeatures::Count)
                .ok_or_else(|| ModelError::InvalidParams(format!("bad max_features `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.min_samples_leaf == 0 {
            return Err(ModelError::InvalidParams("min_samples_leaf must be at least 1".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(ModelError::InvalidParams("max_features must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        /// Drop in summed squared error at this split, divided by the
        /// number of rows the tree was fit on.
        decrease: f64,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Adds each split's decrease to its feature's slot.
    pub fn accumulate_importance(&self, into: &mut [f64]) {
        if let TreeNode::Split {
            feature,
            left,
            right,
            decrease,
            ..
        } = self
        {
            into[*feature] += decrease;
            left.accumulate_importance(into);
            right.accumulate_importance(into);
        }
    }
}

pub(crate) fn check_data(x: &[Vec<f64>], y_len: usize) -> Result<usize, ModelError> {
    if x.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if x.len() != y_len {
        return Err(ModelError::DimensionMismatch {
            expected: x.len(),
            found: y_len,
        });
    }
    let width = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != width) {
        return Err(ModelError::DimensionMismatch {
            expected: width,
            found: row.len(),
        });
    }
    Ok(width)
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: TreeParams,
    n_features: usize,
    try_features: usize,
    total_rows: f64,
    rng: ChaCha8Rng,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    child_sse: f64,
}

fn sse(y: &[f64], rows: &[usize]) -> f64 {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / n;
    rows.iter().map(|&i| (y[i] - mean).powi(2)).sum()
}

impl Grower<'_> {
    fn best_split_on(&self, feature: usize, rows: &mut [usize]) -> Option<Candidate> {
        let x = self.x;
        let y = self.y;
        rows.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
        let n = rows.len();
        let total: f64 = rows.iter().map(|&i| y[i]).sum();
        let total_sq: f64 = rows.iter().map(|&i| y[i] * y[i]).sum();
        let leaf = self.params.min_samples_leaf;
        let mut best: Option<Candidate> = None;
        let (mut sum_l, mut sq_l) = (0.0, 0.0);
        for split in 1..n {
            let yi = y[rows[split - 1]];
            sum_l += yi;
            sq_l += yi * yi;
            let lo = x[rows[split - 1]][feature];
            let hi = x[rows[split]][feature];
            if lo == hi || split < leaf || n - split < leaf {
                continue;
            }
            let (nl, nr) = (split as f64, (n - split) as f64);
            let sum_r = total - sum_l;
            let child_sse = (sq_l - sum_l * sum_l / nl) + (total_sq - sq_l - sum_r * sum_r / nr);
            if best.as_ref().is_none_or(|b| child_sse < b.child_sse) {
                best = Some(Candidate {
                    feature,
                    threshold: lo + (hi - lo) / 2.0,
                    child_sse,
                });
            }
        }
        best
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> TreeNode {
        let n = rows.len();
        let mean = rows.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64;
        let leaf = TreeNode::Leaf {
            value: mean,
            samples: n,
        };
        let first = self.y[rows[0]];
        let pure = rows.iter().all(|&i| self.y[i] == first);
        if pure
            || self.params.max_depth.is_some_and(|d| depth >= d)
            || n < 2 * self.params.min_samples_leaf
        {
            return leaf;
        }

        let mut order: Vec<usize> = (0..self.n_features).collect();
        if self.try_features < self.n_features {
            order.shuffle(&mut self.rng);
        }
        let mut best: Option<Candidate> = None;
        for (visited, &feature) in order.iter().enumerate() {
            if visited >= self.try_features && best.is_some() {
                break;
            }
            if let Some(c) = self.best_split_on(feature, rows) {
                if best.as_ref().is_none_or(|b| c.child_sse < b.child_sse) {
                    best = Some(c);
                }
            }
        }
        let Some(best) = best else {
            return leaf;
        };

        let parent_sse = sse(self.y, rows);
        rows.sort_by(|&a, &b| {
            let (va, vb) = (self.x[a][best.feature], self.x[b][best.feature]);
            (va > best.threshold).cmp(&(vb > best.threshold)).then(a.cmp(&b))
        });
        let cut = rows.partition_point(|&i| self.x[i][best.feature] <= best.threshold);
        let (left_rows, right_rows) = rows.split_at_mut(cut);
        let left_sse = sse(self.y, left_rows);
        let right_sse = sse(self.y, right_rows);
        let decrease = ((parent_sse - left_sse - right_sse) / self.total_rows).max(0.0);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(left),
            right: Box::new(right),
            decrease,
        }
    }
}

/// Grows one regression tree on `rows` (repeats allowed) of `x`.
pub(crate) fn grow_tree(
    x: &[Vec<f64>],
    y: &[f64],
    mut rows: Vec<usize>,
    params: &TreeParams,
    seed: u64,
) -> TreeNode {
    let n_features = x[0].len();
    let mut grower = Grower {
        x,
        y,
        params: *params,
        n_features,
        try_features: params.max_features.resolve(n_features),
        total_rows: rows.len() as f64,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    grower.grow(&mut rows, 0)
}

/// Greedy variance-reduction regression tree on every row of `x`.
pub fn fit_tree(x: &[Vec<f64>], y: &[f64], params: &TreeParams, seed: u64) -> Result<TreeNode, ModelError> {
    check_data(x, y.len())?;
    params.validate()?;
    Ok(grow_tree(x, y, (0..x.len()).collect(), params, seed))
}
