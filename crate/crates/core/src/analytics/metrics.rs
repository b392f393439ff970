use super::AnalyticsError;

fn check_lengths(a: usize, b: usize) -> Result<(), AnalyticsError> {
    if a != b {
        return Err(AnalyticsError::LengthMismatch { left: a, right: b });
    }
    if a == 0 {
        return Err(AnalyticsError::EmptyInput);
    }
    Ok(())
}

/// Fraction of positions where the labels agree.
pub fn accuracy(y_true: &[u8], y_pred: &[u8]) -> Result<f64, AnalyticsError> {
    check_lengths(y_true.len(), y_pred.len())?;
    let correct = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(correct as f64 / y_true.len() as f64)
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub classes: Vec<u8>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    /// Classes are the union of both label vectors plus `extra`, ascending.
    pub fn from_labels(y_true: &[u8], y_pred: &[u8], extra: &[u8]) -> Result<Self, AnalyticsError> {
        check_lengths(y_true.len(), y_pred.len())?;
        let mut classes: Vec<u8> = y_true.iter().chain(y_pred).chain(extra).copied().collect();
        classes.sort_unstable();
        classes.dedup();
        let mut counts = vec![vec![0; classes.len()]; classes.len()];
        let slot = |c: &u8| classes.binary_search(c).expect("class collected above");
        for (t, p) in y_true.iter().zip(y_pred) {
            counts[slot(t)][slot(p)] += 1;
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn from_counts(classes: Vec<u8>, counts: Vec<Vec<usize>>) -> Result<Self, AnalyticsError> {
        let k = classes.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(AnalyticsError::LengthMismatch {
                left: k,
                right: counts.len(),
            });
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Trace over total; `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.trace(), self.total())
    }

    fn index(&self, class: u8) -> Result<usize, AnalyticsError> {
        self.classes
            .binary_search(&class)
            .map_err(|_| AnalyticsError::UnknownClass(class))
    }

    /// (TP, FP, FN, TN) for one class against the rest.
    pub fn one_vs_rest(&self, class: u8) -> Result<(usize, usize, usize, usize), AnalyticsError> {
        let i = self.index(class)?;
        let tp = self.counts[i][i];
        let predicted: usize = self.counts.iter().map(|row| row[i]).sum();
        let actual: usize = self.counts[i].iter().sum();
        let fp = predicted - tp;
        let fn_ = actual - tp;
        let tn = self.total() - tp - fp - fn_;
        Ok((tp, fp, fn_, tn))
    }
}

/// Per-class scores; `None` where the formula is 0/0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub class: u8,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub specificity: Option<f64>,
    /// Rows whose true label is this class.
    pub support: usize,
}

pub(crate) fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Precision TP/(TP+FP), recall TP/(TP+FN), their harmonic mean, and
/// specificity TN/(TN+FP).
pub fn class_metrics(cm: &ConfusionMatrix, class: u8) -> Result<ClassMetrics, AnalyticsError> {
    let (tp, fp, fn_, tn) = cm.one_vs_rest(class)?;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(ClassMetrics {
        class,
        precision,
        recall,
        f1,
        specificity: ratio(tn, tn + fp),
        support: tp + fn_,
    })
}
