//! Random forest regression, proportional-odds ordinal regression, and
//! k-fold grid search.

mod cv;
mod forest;
mod ordinal;
mod serialize;
mod tree;

pub use cv::{grid_search_cv, CvResult, GridPoint, HyperGrid};
pub use forest::{fit_forest, Forest, ForestParams};
pub use ordinal::{fit_ordinal, OrdinalFit, OrdinalModel, OrdinalParams, OrdinalProblem};
pub use serialize::{load_model, save_model, FORMAT_VERSION};
pub use tree::{fit_tree, MaxFeatures, TreeNode, TreeParams};

use crate::dataset::DatasetError;

/// Highest encoded label.
pub const MAX_LABEL: u8 = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("cannot fit on an empty dataset")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training labels contain a single class")]
    SingleClassData,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cannot run {k}-fold cross validation on {rows} rows")]
    TooFewRows { rows: usize, k: usize },
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Rounds half up, then clamps to the label range.
pub fn round_label(value: f64) -> u8 {
    if value.is_nan() {
        return 0;
    }
    (value + 0.5).floor().clamp(0.0, MAX_LABEL as f64) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Forest,
    Ordinal,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Forest, ModelKind::Ordinal];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Forest => "rf",
            ModelKind::Ordinal => "lr",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ModelKind::Forest => "Random Forest",
            ModelKind::Ordinal => "Ordinal Logistic Regression",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rf" | "forest" | "random-forest" => Ok(ModelKind::Forest),
            "lr" | "ordinal" | "ordinal-lr" => Ok(ModelKind::Ordinal),
            other => Err(ModelError::InvalidParams(format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Forest(Forest),
    Ordinal(OrdinalModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Forest(_) => ModelKind::Forest,
            Model::Ordinal(_) => ModelKind::Ordinal,
        }
    }

    pub fn predict_label(&self, x: &[f64]) -> u8 {
        match self {
            Model::Forest(f) => f.predict_label(x),
            Model::Ordinal(m) => m.predict_label(x),
        }
    }

    pub fn predict_labels(&self, rows: &[Vec<f64>]) -> Vec<u8> {
        rows.iter().map(|r| self.predict_label(r)).collect()
    }

    /// Forest importances; `None` for the ordinal model.
    pub fn importances(&self) -> Option<&[f64]> {
        match self {
            Model::Forest(f) => Some(&f.importances),
            Model::Ordinal(_) => None,
        }
    }
}

/// Fits the model described by `point`. Ordinal fits that hit the
/// iteration cap are kept.
pub fn fit_point(x: &[Vec<f64>], y: &[u8], point: &GridPoint) -> Result<Model, ModelError> {
    match point {
        GridPoint::Forest(params) => {
            let target: Vec<f64> = y.iter().map(|&l| l as f64).collect();
            fit_forest(x, &target, params).map(Model::Forest)
        }
        GridPoint::Ordinal(params) => fit_ordinal(x, y, params).map(|fit| Model::Ordinal(fit.model)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_up_and_clamped() {
        assert_eq!(round_label(3.5), 4);
        assert_eq!(round_label(3.49), 3);
        assert_eq!(round_label(0.5), 1);
        assert_eq!(round_label(-0.7), 0);
        assert_eq!(round_label(9.2), 6);
        assert_eq!(round_label(4.0), 4);
    }
}
