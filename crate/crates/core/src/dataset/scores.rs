use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use super::DatasetError;

pub const OBJECTIVE_QUESTIONS: usize = 12;
pub const CODE_WRITING_QUESTIONS: usize = 3;

pub const SCORES_HEADER: &str =
    "student_id,q01,q02,q03,q04,q05,q06,q07,q08,q09,q10,q11,q12,cw1,cw2,cw3";
const OBJECTIVE_HEADER: &str = "student_id,q01,q02,q03,q04,q05,q06,q07,q08,q09,q10,q11,q12";
const CODE_WRITING_HEADER: &str = "student_id,cw1,cw2,cw3";

/// A code-writing mark, 0 to 3 in half-mark steps, stored as half-marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeMark(u8);

impl CodeMark {
    pub fn from_value(mark: f64) -> Result<Self, DatasetError> {
        let halves = mark * 2.0;
        if !(0.0..=6.0).contains(&halves) || halves.fract() != 0.0 {
            return Err(DatasetError::InvalidMark(mark));
        }
        Ok(CodeMark(halves as u8))
    }

    pub fn from_label(label: u8) -> Result<Self, DatasetError> {
        if label <= 6 {
            Ok(CodeMark(label))
        } else {
            Err(DatasetError::InvalidMark(label as f64 / 2.0))
        }
    }

    /// Encoded label 0..=6.
    pub fn label(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl std::fmt::Display for CodeMark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudentRecord {
    pub student_key: String,
    pub objective: [u8; OBJECTIVE_QUESTIONS],
    pub code_writing: [CodeMark; CODE_WRITING_QUESTIONS],
}

impl StudentRecord {
    pub fn features(&self) -> Vec<f64> {
        self.objective.iter().map(|&m| m as f64).collect()
    }
}

fn check_header(found: Option<&str>, expected: &str) -> Result<(), DatasetError> {
    let found = found.map(|h| h.trim().trim_start_matches('\u{feff}')).unwrap_or("");
    let normalize = |s: &str| s.split(',').map(str::trim).collect::<Vec<_>>().join(",");
    if normalize(found) != expected {
        return Err(DatasetError::Schema(format!(
            "header `{found}` does not match `{expected}`"
        )));
    }
    Ok(())
}

fn data_rows(text: &str, header: &str, width: usize) -> Result<Vec<(usize, Vec<String>)>, DatasetError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    check_header(lines.next().map(|(_, l)| l), header)?;
    lines
        .map(|(i, line)| {
            let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
            if fields.len() != width {
                return Err(DatasetError::Schema(format!(
                    "row {} has {} columns, expected {width}",
                    i + 1,
                    fields.len()
                )));
            }
            if fields[0].is_empty() {
                return Err(DatasetError::Value {
                    row: i + 1,
                    column: "student_id".into(),
                    message: "empty student id".into(),
                });
            }
            Ok((i + 1, fields))
        })
        .collect()
}

fn column_name(index: usize) -> String {
    if index <= OBJECTIVE_QUESTIONS {
        format!("q{index:02}")
    } else {
        format!("cw{}", index - OBJECTIVE_QUESTIONS)
    }
}

fn objective_mark(text: &str, row: usize, column: usize) -> Result<u8, DatasetError> {
    match text {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(DatasetError::Value {
            row,
            column: column_name(column),
            message: format!("objective mark `{other}` is not 0 or 1"),
        }),
    }
}

fn code_mark(text: &str, row: usize, column: String) -> Result<CodeMark, DatasetError> {
    let value: f64 = text.parse().map_err(|_| DatasetError::Value {
        row,
        column: column.clone(),
        message: format!("`{text}` is not a number"),
    })?;
    CodeMark::from_value(value).map_err(|_| DatasetError::Value {
        row,
        column,
        message: format!("code-writing mark {text} is not 0 to 3 in steps of 0.5"),
    })
}

fn objective_fields(fields: &[String], row: usize) -> Result<[u8; OBJECTIVE_QUESTIONS], DatasetError> {
    let mut marks = [0u8; OBJECTIVE_QUESTIONS];
    for (q, slot) in marks.iter_mut().enumerate() {
        *slot = objective_mark(&fields[q + 1], row, q + 1)?;
    }
    Ok(marks)
}

fn code_fields(fields: &[String], row: usize) -> Result<[CodeMark; CODE_WRITING_QUESTIONS], DatasetError> {
    let mut marks = [CodeMark(0); CODE_WRITING_QUESTIONS];
    for (c, slot) in marks.iter_mut().enumerate() {
        *slot = code_mark(&fields[c + 1], row, format!("cw{}", c + 1))?;
    }
    Ok(marks)
}

/// Reads a full scores table (`student_id,q01..q12,cw1,cw2,cw3`).
pub fn load_scores(text: &str) -> Result<Vec<StudentRecord>, DatasetError> {
    let width = 1 + OBJECTIVE_QUESTIONS + CODE_WRITING_QUESTIONS;
    data_rows(text, SCORES_HEADER, width)?
        .into_iter()
        .map(|(row, fields)| {
            Ok(StudentRecord {
                objective: objective_fields(&fields, row)?,
                code_writing: code_fields(&fields[OBJECTIVE_QUESTIONS..], row)?,
                student_key: fields[0].clone(),
            })
        })
        .collect()
}

/// Reads graded objective marks (`student_id,q01..q12`).
pub fn load_objective(text: &str) -> Result<Vec<(String, [u8; OBJECTIVE_QUESTIONS])>, DatasetError> {
    data_rows(text, OBJECTIVE_HEADER, 1 + OBJECTIVE_QUESTIONS)?
        .into_iter()
        .map(|(row, fields)| Ok((fields[0].clone(), objective_fields(&fields, row)?)))
        .collect()
}

/// Reads instructor-supplied code-writing marks (`student_id,cw1,cw2,cw3`).
pub fn load_code_writing(
    text: &str,
) -> Result<Vec<(String, [CodeMark; CODE_WRITING_QUESTIONS])>, DatasetError> {
    data_rows(text, CODE_WRITING_HEADER, 1 + CODE_WRITING_QUESTIONS)?
        .into_iter()
        .map(|(row, fields)| Ok((fields[0].clone(), code_fields(&fields, row)?)))
        .collect()
}

/// Joins objective and code-writing marks on student id, in objective-file
/// order. Every graded student needs code-writing marks.
pub fn merge_scores(
    objective: &[(String, [u8; OBJECTIVE_QUESTIONS])],
    code_writing: &[(String, [CodeMark; CODE_WRITING_QUESTIONS])],
) -> Result<Vec<StudentRecord>, DatasetError> {
    let mut cw: HashMap<&str, [CodeMark; CODE_WRITING_QUESTIONS]> = HashMap::new();
    for (id, marks) in code_writing {
        if cw.insert(id.as_str(), *marks).is_some() {
            return Err(DatasetError::DuplicateStudent(id.clone()));
        }
    }
    let mut seen = BTreeMap::new();
    objective
        .iter()
        .map(|(id, marks)| {
            if seen.insert(id.as_str(), ()).is_some() {
                return Err(DatasetError::DuplicateStudent(id.clone()));
            }
            let code_writing = *cw
                .get(id.as_str())
                .ok_or_else(|| DatasetError::MissingCodeWriting(id.clone()))?;
            Ok(StudentRecord {
                student_key: id.clone(),
                objective: *marks,
                code_writing,
            })
        })
        .collect()
}

pub fn render_scores(records: &[StudentRecord]) -> String {
    let mut out = String::from(SCORES_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.student_key);
        for m in r.objective {
            let _ = write!(out, ",{m}");
        }
        for c in r.code_writing {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

pub fn render_objective(rows: &[(String, Vec<u8>)]) -> String {
    let mut out = String::from(OBJECTIVE_HEADER);
    out.push('\n');
    for (id, marks) in rows {
        out.push_str(id);
        for m in marks {
            let _ = write!(out, ",{m}");
        }
        out.push('\n');
    }
    out
}
