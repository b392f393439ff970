//! Score tables, anonymisation, label encoding and train/test splitting.

mod anonymize;
mod scores;
mod split;

pub use anonymize::{anonymize, student_key};
pub use scores::{
    load_code_writing, load_objective, load_scores, merge_scores, render_objective, render_scores,
    CodeMark, StudentRecord, CODE_WRITING_QUESTIONS, OBJECTIVE_QUESTIONS, SCORES_HEADER,
};
pub use split::{make_folds, rebalance_split, Split, SplitSpec};

use crate::instruments::QuestionKind;

/// Number of encoded code-writing labels (marks 0, 0.5, ..., 3).
pub const LABEL_COUNT: usize = 7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("row {row}, column `{column}`: {message}")]
    Value {
        row: usize,
        column: String,
        message: String,
    },
    #[error("invalid code-writing mark {0} (expected 0 to 3 in steps of 0.5)")]
    InvalidMark(f64),
    #[error("anonymisation salt must not be empty")]
    EmptySalt,
    #[error("student ids `{0}` and `{1}` map to the same key")]
    Collision(String, String),
    #[error("duplicate student id `{0}`")]
    DuplicateStudent(String),
    #[error("student `{0}` has no code-writing marks")]
    MissingCodeWriting(String),
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),
    #[error("cannot make {k} folds from {rows} rows")]
    TooFewRows { rows: usize, k: usize },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
}

/// Maps a code-writing mark to its label: 0 -> 0, 0.5 -> 1, ..., 3 -> 6.
pub fn encode_label(mark: f64) -> Result<u8, DatasetError> {
    CodeMark::from_value(mark).map(CodeMark::label)
}

/// Inverse of [`encode_label`].
pub fn decode_label(label: u8) -> Result<f64, DatasetError> {
    CodeMark::from_label(label).map(CodeMark::value)
}

/// Objective marks as features, one encoded code-writing mark as the label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub keys: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    /// Question kind for every feature column.
    pub kind_map: Vec<QuestionKind>,
    /// Which code-writing question (1-based) supplied the labels.
    pub target_index: usize,
}

impl LabeledDataset {
    pub fn from_records(
        records: &[StudentRecord],
        kind_map: &[QuestionKind],
        target_index: usize,
    ) -> Result<Self, DatasetError> {
        if kind_map.len() != OBJECTIVE_QUESTIONS {
            return Err(DatasetError::Schema(format!(
                "kind map covers {} questions, expected {OBJECTIVE_QUESTIONS}",
                kind_map.len()
            )));
        }
        if !(1..=CODE_WRITING_QUESTIONS).contains(&target_index) {
            return Err(DatasetError::Schema(format!(
                "target code-writing question {target_index} is not in 1..={CODE_WRITING_QUESTIONS}"
            )));
        }
        Ok(LabeledDataset {
            keys: records.iter().map(|r| r.student_key.clone()).collect(),
            features: records.iter().map(StudentRecord::features).collect(),
            labels: records
                .iter()
                .map(|r| r.code_writing[target_index - 1].label())
                .collect(),
            kind_map: kind_map.to_vec(),
            target_index,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            keys: indices.iter().map(|&i| self.keys[i].clone()).collect(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            kind_map: self.kind_map.clone(),
            target_index: self.target_index,
        }
    }

    /// Count of each label 0..=6.
    pub fn label_histogram(&self) -> [usize; LABEL_COUNT] {
        let mut counts = [0; LABEL_COUNT];
        for &label in &self.labels {
            counts[label as usize] += 1;
        }
        counts
    }

    /// Per-student summed marks over the questions of `kind`.
    pub fn kind_totals(&self, kind: QuestionKind) -> Vec<f64> {
        self.features
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.kind_map)
                    .filter(|(_, k)| **k == kind)
                    .map(|(v, _)| v)
                    .sum()
            })
            .collect()
    }
}
