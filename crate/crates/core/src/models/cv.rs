use crate::dataset::make_folds;

use super::{fit_point, ForestParams, MaxFeatures, ModelError, ModelKind, OrdinalParams, TreeParams};

/// Candidate values for every hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperGrid {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<Option<usize>>,
    pub min_samples_leaf: Vec<usize>,
    pub max_features: Vec<MaxFeatures>,
    pub l2: Vec<f64>,
    pub k: usize,
}

impl Default for HyperGrid {
    fn default() -> Self {
        HyperGrid {
            n_trees: vec![100, 200],
            max_depth: vec![None, Some(4), Some(8)],
            min_samples_leaf: vec![1, 3],
            max_features: vec![MaxFeatures::All, MaxFeatures::Sqrt],
            l2: vec![0.01, 0.1, 1.0],
            k: 10,
        }
    }
}

/// One fully specified model configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPoint {
    Forest(ForestParams),
    Ordinal(OrdinalParams),
}

impl std::fmt::Display for GridPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridPoint::Forest(p) => {
                let depth = p.tree.max_depth.map_or("none".to_string(), |d| d.to_string());
                write!(
                    f,
                    "n_trees={} max_depth={} min_samples_leaf={} max_features={}",
                    p.n_trees, depth, p.tree.min_samples_leaf, p.tree.max_features
                )
            }
            GridPoint::Ordinal(p) => write!(f, "l2={}", p.l2),
        }
    }
}

impl HyperGrid {
    pub fn validate(&self, kind: ModelKind) -> Result<(), ModelError> {
        if self.k < 2 {
            return Err(ModelError::InvalidParams(format!("k = {} folds; need at least 2", self.k)));
        }
        let empty = match kind {
            ModelKind::Forest => {
                self.n_trees.is_empty()
                    || self.max_depth.is_empty()
                    || self.min_samples_leaf.is_empty()
                    || self.max_features.is_empty()
            }
            ModelKind::Ordinal => self.l2.is_empty(),
        };
        if empty {
            return Err(ModelError::InvalidParams(format!("empty {kind} grid")));
        }
        Ok(())
    }

    /// Grid points in search order; forest seeds are `seed`.
    pub fn points(&self, kind: ModelKind, seed: u64) -> Vec<GridPoint> {
        match kind {
            ModelKind::Forest => {
                let mut out = Vec::new();
                for &n_trees in &self.n_trees {
                    for &max_depth in &self.max_depth {
                        for &min_samples_leaf in &self.min_samples_leaf {
                            for &max_features in &self.max_features {
                                out.push(GridPoint::Forest(ForestParams {
                                    n_trees,
                                    tree: TreeParams {
                                        max_depth,
                                        min_samples_leaf,
                                        max_features,
                                    },
                                    seed,
                                }));
                            }
                        }
                    }
                }
                out
            }
            ModelKind::Ordinal => self
                .l2
                .iter()
                .map(|&l2| GridPoint::Ordinal(OrdinalParams { l2, ..OrdinalParams::default() }))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub kind: ModelKind,
    /// Every grid point with its mean fold accuracy, in search order.
    pub scores: Vec<(GridPoint, f64)>,
    pub best: GridPoint,
    pub best_accuracy: f64,
    pub folds: Vec<usize>,
}

/// Mean held-out accuracy of each grid point over `grid.k` folds. The best
/// point has the highest mean; ties keep the earlier point.
pub fn grid_search_cv(
    x: &[Vec<f64>],
    y: &[u8],
    grid: &HyperGrid,
    kind: ModelKind,
    seed: u64,
) -> Result<CvResult, ModelError> {
    grid.validate(kind)?;
    if x.len() != y.len() {
        return Err(ModelError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < grid.k {
        return Err(ModelError::TooFewRows { rows: x.len(), k: grid.k });
    }
    let folds = make_folds(x.len(), grid.k, seed)?;

    let splits: Vec<_> = (0..grid.k)
        .map(|fold| {
            let (mut train_x, mut train_y, mut test_x, mut test_y) = (vec![], vec![], vec![], vec![]);
            for (i, &f) in folds.iter().enumerate() {
                if f == fold {
                    test_x.push(x[i].clone());
                    test_y.push(y[i]);
                } else {
                    train_x.push(x[i].clone());
                    train_y.push(y[i]);
                }
            }
            (train_x, train_y, test_x, test_y)
        })
        .collect();

    let mut scores = Vec::new();
    for point in grid.points(kind, seed) {
        let mut total = 0.0;
        for (train_x, train_y, test_x, test_y) in &splits {
            let model = fit_point(train_x, train_y, &point)?;
            let correct = model
                .predict_labels(test_x)
                .iter()
                .zip(test_y)
                .filter(|(p, t)| p == t)
                .count();
            total += correct as f64 / test_y.len() as f64;
        }
        scores.push((point, total / grid.k as f64));
    }
    let (best, best_accuracy) = scores
        .iter()
        .fold(None::<&(GridPoint, f64)>, |best, s| match best {
            Some(b) if b.1 >= s.1 => Some(b),
            _ => Some(s),
        })
        .copied()
        .expect("grid is not empty");
    Ok(CvResult {
        kind,
        scores,
        best,
        best_accuracy,
        folds,
    })
}
