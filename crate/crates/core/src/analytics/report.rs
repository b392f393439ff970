use std::fmt::Write;

use crate::dataset::{rebalance_split, LabeledDataset, SplitSpec, LABEL_COUNT};
use crate::instruments::QuestionKind;
use crate::models::{fit_point, grid_search_cv, GridPoint, HyperGrid, Model, ModelKind};

use super::{
    at_risk, class_metrics, correlation_table, fmt4, importance_by_kind, AnalyticsError, AtRisk, ClassMetrics,
    ConfusionMatrix, CorrelationTable, TABLE_ORDER,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// One evaluation per split and model kind.
    pub splits: Vec<SplitSpec>,
    pub kinds: Vec<ModelKind>,
    pub grid: HyperGrid,
    /// Seeds fold assignment and forest growth.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSummary {
    pub name: String,
    pub train_rows: usize,
    pub test_rows: usize,
    pub rare_labels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEvaluation {
    pub kind: ModelKind,
    pub split: String,
    pub best: GridPoint,
    pub cv_accuracy: f64,
    pub cv_scores: Vec<(GridPoint, f64)>,
    pub test_accuracy: Option<f64>,
    /// Accuracy of always predicting the most common training label.
    pub majority_baseline: Option<f64>,
    pub confusion: ConfusionMatrix,
    /// Labels 0 to 6.
    pub class_metrics: Vec<ClassMetrics>,
    pub importance_by_kind: Option<Vec<(QuestionKind, f64)>>,
    /// Held-out students predicted at label 0 or 1.
    pub at_risk: Vec<AtRisk>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub rows: usize,
    pub target_index: usize,
    pub label_histogram: [usize; LABEL_COUNT],
    pub correlation: CorrelationTable,
    pub splits: Vec<SplitSummary>,
    pub evaluations: Vec<ModelEvaluation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub split: String,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub report: EvaluationReport,
    pub models: Vec<TrainedModel>,
}

fn majority_label(labels: &[u8]) -> u8 {
    let mut counts = [0usize; LABEL_COUNT];
    for &l in labels {
        counts[l as usize] += 1;
    }
    let mut best = 0;
    for (label, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = label;
        }
    }
    best as u8
}

/// Split, grid-search on the train part, refit the best point on all of
/// train, then score on the held-out part.
pub fn train_and_evaluate(d: &LabeledDataset, config: &TrainConfig) -> Result<TrainOutcome, AnalyticsError> {
    let correlation = correlation_table(d)?;
    let mut splits = Vec::new();
    let mut evaluations = Vec::new();
    let mut models = Vec::new();
    let all_labels: Vec<u8> = (0..LABEL_COUNT as u8).collect();

    for spec in &config.splits {
        let split = rebalance_split(d, spec)?;
        let name = spec.name();
        splits.push(SplitSummary {
            name: name.clone(),
            train_rows: split.train.len(),
            test_rows: split.test.len(),
            rare_labels: split.rare_labels.clone(),
        });
        let (train, test) = (&split.train, &split.test);
        let majority = majority_label(&train.labels);
        let majority_hits = test.labels.iter().filter(|&&l| l == majority).count();
        for &kind in &config.kinds {
            let cv = grid_search_cv(&train.features, &train.labels, &config.grid, kind, config.seed)?;
            let model = fit_point(&train.features, &train.labels, &cv.best)?;
            let predicted = model.predict_labels(&test.features);
            let confusion = ConfusionMatrix::from_labels(&test.labels, &predicted, &all_labels)
                .or_else(|_| ConfusionMatrix::from_counts(all_labels.clone(), vec![vec![0; LABEL_COUNT]; LABEL_COUNT]))?;
            let metrics = all_labels
                .iter()
                .map(|&c| class_metrics(&confusion, c))
                .collect::<Result<Vec<_>, _>>()?;
            evaluations.push(ModelEvaluation {
                kind,
                split: name.clone(),
                best: cv.best,
                cv_accuracy: cv.best_accuracy,
                cv_scores: cv.scores,
                test_accuracy: confusion.accuracy(),
                majority_baseline: super::metrics::ratio(majority_hits, test.len()),
                importance_by_kind: model.importances().map(|imp| importance_by_kind(imp, &d.kind_map)),
                at_risk: at_risk(&model, test),
                class_metrics: metrics,
                confusion,
            });
            models.push(TrainedModel {
                split: name.clone(),
                model,
            });
        }
    }

    Ok(TrainOutcome {
        report: EvaluationReport {
            rows: d.len(),
            target_index: d.target_index,
            label_histogram: d.label_histogram(),
            correlation,
            splits,
            evaluations,
        },
        models,
    })
}

fn kind_title(kind: QuestionKind) -> &'static str {
    match kind {
        QuestionKind::Tracing => "Tracing",
        QuestionKind::Detection => "Detection",
        QuestionKind::Comparison => "Comparison",
        QuestionKind::Analysis => "Analysis",
    }
}

impl EvaluationReport {
    /// Plain-text tables.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ART evaluation report");
        let _ = writeln!(out, "=====================");
        let histogram: Vec<String> = self.label_histogram.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "students: {}  target: cw{}  label counts (0..6): {}",
            self.rows,
            self.target_index,
            histogram.join(" ")
        );
        for s in &self.splits {
            let rare: Vec<String> = s.rare_labels.iter().map(ToString::to_string).collect();
            let rare = if rare.is_empty() { "none".to_string() } else { rare.join(",") };
            let _ = writeln!(
                out,
                "split {}: {} train, {} test, rare labels kept in train: {}",
                s.name, s.train_rows, s.test_rows, rare
            );
        }

        let _ = writeln!(out, "\nAccuracy by split and model");
        let _ = writeln!(
            out,
            "{:<7}{:<30}{:>12}{:>15}{:>11}",
            "split", "model", "cv accuracy", "test accuracy", "majority"
        );
        for e in &self.evaluations {
            let _ = writeln!(
                out,
                "{:<7}{:<30}{:>12}{:>15}{:>11}",
                e.split,
                e.kind.title(),
                fmt4(Some(e.cv_accuracy)),
                fmt4(e.test_accuracy),
                fmt4(e.majority_baseline)
            );
        }
        let _ = writeln!(
            out,
            "cv accuracy: mean over the folds of the train part; test accuracy: held-out part."
        );

        let _ = writeln!(out, "\nSpearman rank correlation with code writing");
        let mut header = String::new();
        let mut values = String::new();
        for kind in TABLE_ORDER {
            let _ = write!(header, "{:<12}", kind_title(kind));
            let _ = write!(values, "{:<12}", fmt4(self.correlation.get(kind)));
        }
        let _ = writeln!(out, "{header}ART average");
        let _ = writeln!(out, "{values}{}", fmt4(self.correlation.art_average));
        let _ = writeln!(
            out,
            "Pearson, summed comparison + detection + analysis score: {}",
            fmt4(self.correlation.art_pearson)
        );

        for e in &self.evaluations {
            let _ = writeln!(out, "\n{}, {} split", e.kind.title(), e.split);
            let _ = writeln!(out, "  best parameters: {}", e.best);
            let _ = writeln!(
                out,
                "  {:<7}{:>9}{:>11}{:>9}{:>9}{:>13}",
                "label", "support", "precision", "recall", "f1", "specificity"
            );
            for m in &e.class_metrics {
                let _ = writeln!(
                    out,
                    "  {:<7}{:>9}{:>11}{:>9}{:>9}{:>13}",
                    m.class,
                    m.support,
                    fmt4(m.precision),
                    fmt4(m.recall),
                    fmt4(m.f1),
                    fmt4(m.specificity)
                );
            }
            if let Some(by_kind) = &e.importance_by_kind {
                let mut ranked = by_kind.clone();
                ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
                let parts: Vec<String> = ranked
                    .iter()
                    .map(|(k, v)| format!("{} {}", kind_title(*k), fmt4(Some(*v))))
                    .collect();
                let _ = writeln!(out, "  importance by kind: {}", parts.join(", "));
            }
            let _ = writeln!(out, "  at-risk students (predicted mark 0 or 0.5): {}", e.at_risk.len());
            for r in &e.at_risk {
                let _ = writeln!(out, "    {} {}", r.student_key, r.label);
            }
        }
        let _ = writeln!(
            out,
            "\nprecision = TP/(TP+FP); specificity = TN/(TN+FP); n/a marks a 0/0 ratio."
        );
        out
    }

    /// `key = value` lines with stable names.
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        let mut put = |key: String, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("rows".into(), self.rows.to_string());
        put("target".into(), format!("cw{}", self.target_index));
        for (label, count) in self.label_histogram.iter().enumerate() {
            put(format!("labels.{label}"), count.to_string());
        }
        for kind in TABLE_ORDER {
            put(format!("correlation.spearman.{}", kind.name()), fmt4(self.correlation.get(kind)));
        }
        put("correlation.art_average".into(), fmt4(self.correlation.art_average));
        put("correlation.art_pearson".into(), fmt4(self.correlation.art_pearson));
        for s in &self.splits {
            let p = format!("split.{}", s.name);
            put(format!("{p}.train_rows"), s.train_rows.to_string());
            put(format!("{p}.test_rows"), s.test_rows.to_string());
            let rare: Vec<String> = s.rare_labels.iter().map(ToString::to_string).collect();
            put(format!("{p}.rare_labels"), rare.join(","));
        }
        for e in &self.evaluations {
            let p = format!("split.{}.{}", e.split, e.kind.name());
            put(format!("{p}.best_params"), e.best.to_string());
            put(format!("{p}.cv_accuracy"), fmt4(Some(e.cv_accuracy)));
            put(format!("{p}.test_accuracy"), fmt4(e.test_accuracy));
            put(format!("{p}.majority_baseline"), fmt4(e.majority_baseline));
            for m in &e.class_metrics {
                let c = format!("{p}.class.{}", m.class);
                put(format!("{c}.support"), m.support.to_string());
                put(format!("{c}.precision"), fmt4(m.precision));
                put(format!("{c}.recall"), fmt4(m.recall));
                put(format!("{c}.f1"), fmt4(m.f1));
                put(format!("{c}.specificity"), fmt4(m.specificity));
            }
            if let Some(by_kind) = &e.importance_by_kind {
                for (kind, v) in by_kind {
                    put(format!("{p}.importance.{}", kind.name()), fmt4(Some(*v)));
                }
            }
            let listed: Vec<String> = e.at_risk.iter().map(|r| format!("{}:{}", r.student_key, r.label)).collect();
            put(format!("{p}.at_risk"), listed.join(","));
        }
        out
    }
}
