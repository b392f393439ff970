use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::algolang::Value;

use super::{AnswerKey, InstrumentError, KeyAnswer, Payload, Question};

/// A 0/1 mark. Partially correct answers score 0; nothing is negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectiveMark(u8);

impl ObjectiveMark {
    pub const ZERO: ObjectiveMark = ObjectiveMark(0);
    pub const ONE: ObjectiveMark = ObjectiveMark(1);

    pub fn from_correct(correct: bool) -> Self {
        if correct {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub student_id: String,
    pub question_id: String,
    pub answer: String,
    /// Line in the responses file (0 when built in code).
    pub line: usize,
}

impl Response {
    pub fn new(student_id: &str, question_id: &str, answer: &str) -> Self {
        Response {
            student_id: student_id.to_string(),
            question_id: question_id.to_string(),
            answer: answer.to_string(),
            line: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    Missing,
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub student_id: String,
    pub question_id: String,
    pub kind: DiagnosticKind,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            DiagnosticKind::Missing => write!(f, "{},{},missing", self.student_id, self.question_id),
            DiagnosticKind::Malformed(why) => write!(
                f,
                "{},{},malformed: {}",
                self.student_id, self.question_id, why
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graded {
    pub mark: ObjectiveMark,
    /// Set when the answer text could not be read; the mark is then 0.
    pub malformed: Option<String>,
}

fn parse_index_list(text: &str) -> Result<BTreeSet<usize>, String> {
    let trimmed = text.trim().trim_start_matches('{').trim_end_matches('}');
    trimmed
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| format!("`{t}` is not a candidate number"))
        })
        .collect()
}

fn parse_option(text: &str) -> Result<usize, String> {
    let t = text.trim();
    match t.as_bytes() {
        [c @ b'A'..=b'Z'] => Ok((c - b'A') as usize),
        [c @ b'a'..=b'z'] => Ok((c - b'a') as usize),
        _ => t
            .parse::<usize>()
            .map_err(|_| format!("`{t}` is not an option letter or index")),
    }
}

fn parse_value(text: &str) -> Result<Value, String> {
    text.parse::<Value>().map_err(|e| e.to_string())
}

/// Marks one response: 1 only for an exactly correct answer.
pub fn grade(question: &Question, key: &AnswerKey, response: &Response) -> Result<Graded, InstrumentError> {
    if key.question_id != question.id || key.answer.kind() != question.kind() {
        return Err(InstrumentError::KeyMismatch(question.id.clone()));
    }
    let correct: Result<bool, String> = match (&key.answer, &question.payload) {
        (KeyAnswer::Tracing(expected), _) => parse_value(&response.answer).map(|v| &v == expected),
        (KeyAnswer::Detection(expected), _) => response
            .answer
            .split(';')
            .map(parse_value)
            .collect::<Result<Vec<_>, _>>()
            .map(|given| &given == expected),
        (KeyAnswer::Comparison { .. }, Payload::Comparison { candidates, .. }) => {
            parse_index_list(&response.answer).and_then(|selected| {
                if let Some(bad) = selected.iter().find(|&&i| i >= candidates.len()) {
                    return Err(format!("candidate {bad} does not exist"));
                }
                Ok(Some(selected) == key.comparison_selection())
            })
        }
        (KeyAnswer::Analysis(expected), Payload::Analysis { options, .. }) => {
            parse_option(&response.answer).and_then(|chosen| {
                if chosen >= options.len() {
                    Err(format!("option {chosen} does not exist"))
                } else {
                    Ok(chosen == *expected)
                }
            })
        }
        _ => return Err(InstrumentError::KeyMismatch(question.id.clone())),
    };
    Ok(match correct {
        Ok(ok) => Graded {
            mark: ObjectiveMark::from_correct(ok),
            malformed: None,
        },
        Err(why) => Graded {
            mark: ObjectiveMark::ZERO,
            malformed: Some(why),
        },
    })
}

/// One student's marks, aligned with bank order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreRow {
    pub student_id: String,
    pub marks: Vec<ObjectiveMark>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradeSheet {
    /// Sorted by student id.
    pub rows: Vec<ScoreRow>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Grades every student who submitted at least one response.
///
/// Unanswered questions score 0 and are reported as missing; unreadable
/// answers score 0 and are reported as malformed.
pub fn grade_sheet(
    bank: &[(Question, AnswerKey)],
    responses: &[Response],
) -> Result<GradeSheet, InstrumentError> {
    let position: HashMap<&str, usize> = bank
        .iter()
        .enumerate()
        .map(|(i, (q, _))| (q.id.as_str(), i))
        .collect();

    let mut by_student: BTreeMap<&str, Vec<Option<&Response>>> = BTreeMap::new();
    for response in responses {
        let &slot = position
            .get(response.question_id.as_str())
            .ok_or_else(|| InstrumentError::UnknownQuestion {
                question: response.question_id.clone(),
                line: response.line,
            })?;
        let answers = by_student
            .entry(response.student_id.as_str())
            .or_insert_with(|| vec![None; bank.len()]);
        if let Some(previous) = answers[slot] {
            return Err(InstrumentError::DuplicateResponse {
                student: response.student_id.clone(),
                question: response.question_id.clone(),
                first: previous.line.min(response.line),
                second: previous.line.max(response.line),
            });
        }
        answers[slot] = Some(response);
    }

    let mut rows = Vec::with_capacity(by_student.len());
    let mut diagnostics = Vec::new();
    for (student, answers) in by_student {
        let mut marks = Vec::with_capacity(bank.len());
        for ((question, key), answer) in bank.iter().zip(answers) {
            let diagnostic = |kind| Diagnostic {
                student_id: student.to_string(),
                question_id: question.id.clone(),
                kind,
            };
            match answer {
                None => {
                    marks.push(ObjectiveMark::ZERO);
                    diagnostics.push(diagnostic(DiagnosticKind::Missing));
                }
                Some(response) => {
                    let graded = grade(question, key, response)?;
                    if let Some(why) = graded.malformed {
                        diagnostics.push(diagnostic(DiagnosticKind::Malformed(why)));
                    }
                    marks.push(graded.mark);
                }
            }
        }
        rows.push(ScoreRow {
            student_id: student.to_string(),
            marks,
        });
    }
    Ok(GradeSheet { rows, diagnostics })
}

/// Reads `student_id,question_id,answer_text` rows. The answer is everything
/// after the second comma, optionally wrapped in double quotes. A header row
/// starting with `student_id` is skipped.
pub fn parse_responses(text: &str) -> Result<Vec<Response>, InstrumentError> {
    let mut out = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut fields = raw.splitn(3, ',');
        let student = fields.next().unwrap_or("").trim();
        let Some(question) = fields.next().map(str::trim) else {
            return Err(InstrumentError::MalformedRow {
                line,
                message: "expected student_id,question_id,answer_text".into(),
            });
        };
        if line == 1 && student == "student_id" {
            continue;
        }
        if student.is_empty() || question.is_empty() {
            return Err(InstrumentError::MalformedRow {
                line,
                message: "empty student or question id".into(),
            });
        }
        let answer = fields.next().unwrap_or("").trim();
        let answer = answer
            .strip_prefix('"')
            .and_then(|a| a.strip_suffix('"'))
            .unwrap_or(answer);
        out.push(Response {
            student_id: student.to_string(),
            question_id: question.to_string(),
            answer: answer.to_string(),
            line,
        });
    }
    Ok(out)
}
