use crate::dataset::LabeledDataset;
use crate::instruments::QuestionKind;

use super::AnalyticsError;

fn check(x: &[f64], y: &[f64]) -> Result<(), AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(AnalyticsError::EmptyInput);
    }
    Ok(())
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalyticsError> {
    check(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of midranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, AnalyticsError> {
    check(x, y)?;
    pearson(&midranks(x), &midranks(y))
}

/// Spearman correlation of each kind's summed marks with the target label.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    /// In the order tracing, comparison, detection, analysis. `None` when a
    /// kind is absent or its totals are constant.
    pub spearman: Vec<(QuestionKind, Option<f64>)>,
    /// Mean of the defined comparison, detection and analysis entries.
    pub art_average: Option<f64>,
    /// Pearson correlation of the summed comparison + detection + analysis
    /// score with the target label.
    pub art_pearson: Option<f64>,
}

pub const TABLE_ORDER: [QuestionKind; 4] = [
    QuestionKind::Tracing,
    QuestionKind::Comparison,
    QuestionKind::Detection,
    QuestionKind::Analysis,
];

impl CorrelationTable {
    pub fn get(&self, kind: QuestionKind) -> Option<f64> {
        self.spearman.iter().find(|(k, _)| *k == kind).and_then(|(_, v)| *v)
    }
}

fn defined(result: Result<f64, AnalyticsError>) -> Result<Option<f64>, AnalyticsError> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(AnalyticsError::ZeroVariance) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn correlation_table(d: &LabeledDataset) -> Result<CorrelationTable, AnalyticsError> {
    let target: Vec<f64> = d.labels.iter().map(|&l| l as f64).collect();
    if target.len() < 2 {
        return Err(AnalyticsError::EmptyInput);
    }
    if target.iter().all(|&v| v == target[0]) {
        return Err(AnalyticsError::ZeroVariance);
    }
    let mut entries = Vec::new();
    for kind in TABLE_ORDER {
        let value = if d.kind_map.contains(&kind) {
            defined(spearman(&d.kind_totals(kind), &target))?
        } else {
            None
        };
        entries.push((kind, value));
    }
    let art: Vec<f64> = entries
        .iter()
        .filter(|(k, _)| k.is_reasoning_task())
        .filter_map(|(_, v)| *v)
        .collect();
    let art_average = (!art.is_empty()).then(|| art.iter().sum::<f64>() / art.len() as f64);

    let art_total: Vec<f64> = d
        .features
        .iter()
        .map(|row| {
            row.iter()
                .zip(&d.kind_map)
                .filter(|(_, k)| k.is_reasoning_task())
                .map(|(v, _)| v)
                .sum()
        })
        .collect();
    let art_pearson = defined(pearson(&art_total, &target))?;
    Ok(CorrelationTable {
        spearman: entries,
        art_average,
        art_pearson,
    })
}
