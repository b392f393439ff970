use std::collections::BTreeSet;
use std::fmt::Write;

use crate::algolang::{equivalent, execute, extremal_input, measure, Program, Value};

use super::{option_letter, InstrumentError, Payload, Question, QuestionKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyAnswer {
    Tracing(Value),
    /// One expected output per detection input, in order.
    Detection(Vec<Value>),
    Comparison {
        /// Behavioural equivalence classes over the candidates, each sorted,
        /// ordered by smallest member.
        partition: Vec<Vec<usize>>,
    },
    /// Index of the correct option.
    Analysis(usize),
}

impl KeyAnswer {
    pub fn kind(&self) -> QuestionKind {
        match self {
            KeyAnswer::Tracing(_) => QuestionKind::Tracing,
            KeyAnswer::Detection(_) => QuestionKind::Detection,
            KeyAnswer::Comparison { .. } => QuestionKind::Comparison,
            KeyAnswer::Analysis(_) => QuestionKind::Analysis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerKey {
    pub question_id: String,
    pub answer: KeyAnswer,
}

impl AnswerKey {
    /// Candidates a student must select for a comparison question: those
    /// equivalent to the reference candidate 0, excluding it.
    pub fn comparison_selection(&self) -> Option<BTreeSet<usize>> {
        match &self.answer {
            KeyAnswer::Comparison { partition } => Some(
                partition
                    .iter()
                    .find(|class| class.contains(&0))
                    .map(|class| class.iter().copied().filter(|&c| c != 0).collect())
                    .unwrap_or_default(),
            ),
            _ => None,
        }
    }
}

fn run_for_key(
    question: &Question,
    program: &Program,
    input: &[i64],
    step_limit: u64,
) -> Result<Value, InstrumentError> {
    execute(program, input, step_limit)
        .outcome
        .map_err(|error| InstrumentError::KeyExecution {
            question: question.id.clone(),
            input: input.to_vec(),
            error,
        })
}

/// Derives the answer key by executing or exploring the question's programs.
pub fn generate_key(question: &Question, step_limit: u64) -> Result<AnswerKey, InstrumentError> {
    let explore_err = |error| InstrumentError::Explore {
        question: question.id.clone(),
        error,
    };
    let answer = match &question.payload {
        Payload::Tracing { program, input } => {
            KeyAnswer::Tracing(run_for_key(question, program, input, step_limit)?)
        }
        Payload::Detection { program, inputs } => KeyAnswer::Detection(
            inputs
                .iter()
                .map(|input| run_for_key(question, program, input, step_limit))
                .collect::<Result<_, _>>()?,
        ),
        Payload::Comparison { candidates, domain } => {
            // Equivalence over a finite domain is transitive, so comparing
            // with each class's first member is enough.
            let mut partition: Vec<Vec<usize>> = Vec::new();
            for (index, candidate) in candidates.iter().enumerate() {
                let mut placed = false;
                for class in partition.iter_mut() {
                    let verdict = equivalent(&candidates[class[0]], candidate, domain, step_limit)
                        .map_err(explore_err)?;
                    if verdict.equivalent {
                        class.push(index);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    partition.push(vec![index]);
                }
            }
            KeyAnswer::Comparison { partition }
        }
        Payload::Analysis {
            program,
            domain,
            metric,
            direction,
            options,
        } => {
            let extremum = extremal_input(program, domain, *metric, *direction, step_limit)
                .map_err(explore_err)?;
            let mut winners = Vec::new();
            for (i, option) in options.iter().enumerate() {
                let value = measure(program, option, *metric, step_limit).map_err(explore_err)?;
                if value == extremum.metric_value {
                    winners.push(i);
                }
            }
            match winners.as_slice() {
                [] => {
                    return Err(InstrumentError::NoCorrectOption {
                        question: question.id.clone(),
                        value: extremum.metric_value,
                    })
                }
                [single] => KeyAnswer::Analysis(*single),
                many => {
                    return Err(InstrumentError::AmbiguousKey {
                        question: question.id.clone(),
                        options: many.iter().map(|&i| option_letter(i)).collect(),
                        value: extremum.metric_value,
                    })
                }
            }
        }
    };
    Ok(AnswerKey {
        question_id: question.id.clone(),
        answer,
    })
}

/// One tab-separated line per key: `id`, `kind`, answer.
pub fn render_key_file(keys: &[AnswerKey]) -> String {
    let mut out = String::from("# question\tkind\tanswer\n");
    for key in keys {
        let answer = match &key.answer {
            KeyAnswer::Tracing(v) => v.to_string(),
            KeyAnswer::Detection(values) => values
                .iter()
                .map(Value::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            KeyAnswer::Comparison { partition } => partition
                .iter()
                .map(|class| {
                    class
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect::<Vec<_>>()
                .join("|"),
            KeyAnswer::Analysis(option) => option_letter(*option),
        };
        let _ = writeln!(out, "{}\t{}\t{}", key.question_id, key.answer.kind(), answer);
    }
    out
}

pub fn parse_key_file(text: &str) -> Result<Vec<AnswerKey>, InstrumentError> {
    let mut keys = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let err = |message: String| InstrumentError::KeyFile { line, message };
        let mut fields = raw.splitn(3, '\t');
        let (Some(id), Some(kind), Some(answer)) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(err("expected three tab-separated fields".into()));
        };
        let kind: QuestionKind = kind.parse().map_err(err)?;
        let value = |text: &str| text.parse::<Value>().map_err(|e| err(e.to_string()));
        let answer = match kind {
            QuestionKind::Tracing => KeyAnswer::Tracing(value(answer)?),
            QuestionKind::Detection => {
                KeyAnswer::Detection(answer.split(';').map(value).collect::<Result<_, _>>()?)
            }
            QuestionKind::Comparison => {
                let partition = answer
                    .split('|')
                    .map(|class| {
                        class
                            .split(',')
                            .map(|i| i.trim().parse::<usize>().map_err(|e| err(e.to_string())))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?;
                KeyAnswer::Comparison { partition }
            }
            QuestionKind::Analysis => {
                let letter = answer.trim();
                let index = match letter.as_bytes() {
                    [c @ b'A'..=b'Z'] => (c - b'A') as usize,
                    _ => return Err(err(format!("invalid option `{letter}`"))),
                };
                KeyAnswer::Analysis(index)
            }
        };
        keys.push(AnswerKey {
            question_id: id.to_string(),
            answer,
        });
    }
    Ok(keys)
}
