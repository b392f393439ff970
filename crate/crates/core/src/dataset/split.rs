use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetError, LabeledDataset, LABEL_COUNT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    /// Labels seen fewer times than this never reach the test set.
    pub rare_threshold: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(test_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            test_fraction,
            rare_threshold: 10,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(DatasetError::InvalidSplit(format!(
                "test fraction {} is not strictly between 0 and 1",
                self.test_fraction
            )));
        }
        if self.rare_threshold == 0 {
            return Err(DatasetError::InvalidSplit("rare threshold must be at least 1".into()));
        }
        Ok(())
    }

    /// "75-25" style name.
    pub fn name(&self) -> String {
        let test = (self.test_fraction * 100.0).round() as u32;
        format!("{}-{}", 100 - test, test)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Source row of every train row.
    pub train_rows: Vec<usize>,
    /// Source row of every test row.
    pub test_rows: Vec<usize>,
    /// Labels that were held back from the test set.
    pub rare_labels: Vec<u8>,
}

/// Per-label test counts. Each count is `round(freq * fraction)`; when those
/// do not add up to `round(kept * fraction)` the largest labels whose
/// rounding went the other way are adjusted by one.
pub(crate) fn test_counts(freq: &[usize; LABEL_COUNT], kept: &[bool; LABEL_COUNT], fraction: f64) -> [usize; LABEL_COUNT] {
    let mut counts = [0usize; LABEL_COUNT];
    let mut total_kept = 0;
    for label in 0..LABEL_COUNT {
        if kept[label] {
            counts[label] = (freq[label] as f64 * fraction).round() as usize;
            total_kept += freq[label];
        }
    }
    let target = (total_kept as f64 * fraction).round() as i64;
    let mut diff = counts.iter().sum::<usize>() as i64 - target;

    let mut order: Vec<usize> = (0..LABEL_COUNT).filter(|&l| kept[l]).collect();
    order.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
    for &label in &order {
        if diff == 0 {
            break;
        }
        let exact = freq[label] as f64 * fraction;
        let error = counts[label] as f64 - exact;
        if diff > 0 && error > 0.0 && counts[label] > 0 {
            counts[label] -= 1;
            diff -= 1;
        } else if diff < 0 && error < 0.0 && counts[label] < freq[label] {
            counts[label] += 1;
            diff += 1;
        }
    }
    counts
}

/// Sets rare-label rows aside, splits the rest by stratified sampling, then
/// appends the rare rows to train.
pub fn rebalance_split(d: &LabeledDataset, s: &SplitSpec) -> Result<Split, DatasetError> {
    s.validate()?;
    let freq = d.label_histogram();
    let mut kept = [false; LABEL_COUNT];
    for label in 0..LABEL_COUNT {
        kept[label] = freq[label] >= s.rare_threshold && freq[label] > 0;
    }
    let usable = (0..LABEL_COUNT).filter(|&l| kept[l] && freq[l] >= 2).count();
    if usable < 2 {
        return Err(DatasetError::DegenerateDataset(format!(
            "fewer than two labels with at least {} rows (label counts {:?})",
            s.rare_threshold.max(2),
            freq
        )));
    }

    let counts = test_counts(&freq, &kept, s.test_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut in_test = vec![false; d.len()];
    for label in 0..LABEL_COUNT {
        if !kept[label] {
            continue;
        }
        let mut rows: Vec<usize> = (0..d.len()).filter(|&i| d.labels[i] as usize == label).collect();
        rows.shuffle(&mut rng);
        for &row in &rows[..counts[label]] {
            in_test[row] = true;
        }
    }

    let is_rare = |i: usize| !kept[d.labels[i] as usize];
    let test_rows: Vec<usize> = (0..d.len()).filter(|&i| in_test[i]).collect();
    let mut train_rows: Vec<usize> = (0..d.len()).filter(|&i| !in_test[i] && !is_rare(i)).collect();
    train_rows.extend((0..d.len()).filter(|&i| is_rare(i)));

    Ok(Split {
        train: d.subset(&train_rows),
        test: d.subset(&test_rows),
        train_rows,
        test_rows,
        rare_labels: (0..LABEL_COUNT as u8)
            .filter(|&l| freq[l as usize] > 0 && !kept[l as usize])
            .collect(),
    })
}

/// Fold index for each of `rows` rows. The fold sizes differ by at most one;
/// the first `rows % k` folds hold the extra rows.
pub fn make_folds(rows: usize, k: usize, seed: u64) -> Result<Vec<usize>, DatasetError> {
    if k < 2 || rows < k {
        return Err(DatasetError::TooFewRows { rows, k });
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = rows / k;
    let extra = rows % k;
    let mut folds = vec![0; rows];
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[cursor..cursor + size] {
            folds[row] = fold;
        }
        cursor += size;
    }
    Ok(folds)
}
