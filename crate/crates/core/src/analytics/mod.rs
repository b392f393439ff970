//! Evaluation metrics, correlation tables, importance summaries and reports.

mod correlation;
mod metrics;
mod report;

pub use correlation::{correlation_table, midranks, pearson, spearman, CorrelationTable, TABLE_ORDER};
pub use metrics::{accuracy, class_metrics, ClassMetrics, ConfusionMatrix};
pub use report::{
    train_and_evaluate, EvaluationReport, ModelEvaluation, SplitSummary, TrainConfig, TrainOutcome, TrainedModel,
};

use crate::dataset::{DatasetError, LabeledDataset};
use crate::instruments::QuestionKind;
use crate::models::{Model, ModelError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("not enough values")]
    EmptyInput,
    #[error("zero variance")]
    ZeroVariance,
    #[error("class {0} is not in the confusion matrix")]
    UnknownClass(u8),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Labels 0 and 1, i.e. code-writing marks 0 and 0.5.
pub const AT_RISK_LABELS: [u8; 2] = [0, 1];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AtRisk {
    pub label: u8,
    pub student_key: String,
}

/// Students the model places at label 0 or 1, by label then key.
pub fn at_risk(model: &Model, d: &LabeledDataset) -> Vec<AtRisk> {
    let mut out: Vec<AtRisk> = d
        .keys
        .iter()
        .zip(&d.features)
        .filter_map(|(key, x)| {
            let label = model.predict_label(x);
            AT_RISK_LABELS.contains(&label).then(|| AtRisk {
                label,
                student_key: key.clone(),
            })
        })
        .collect();
    out.sort();
    out
}

/// Feature importances summed per question kind, in [`QuestionKind::ALL`]
/// order.
pub fn importance_by_kind(importances: &[f64], kind_map: &[QuestionKind]) -> Vec<(QuestionKind, f64)> {
    QuestionKind::ALL
        .iter()
        .map(|&kind| {
            let total = importances
                .iter()
                .zip(kind_map)
                .filter(|(_, k)| **k == kind)
                .map(|(v, _)| v)
                .sum();
            (kind, total)
        })
        .collect()
}

/// Kind with the largest summed importance; ties go to the earlier kind.
pub fn top_kind(by_kind: &[(QuestionKind, f64)]) -> Option<QuestionKind> {
    by_kind
        .iter()
        .fold(None::<&(QuestionKind, f64)>, |best, e| match best {
            Some(b) if b.1 >= e.1 => Some(b),
            _ => Some(e),
        })
        .filter(|(_, v)| *v > 0.0)
        .map(|(k, _)| *k)
}

/// Fixed four decimals, or `n/a`.
pub fn fmt4(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}
