//! Objective question instruments: tracing questions and the three
//! algorithmic reasoning types (detection, comparison, analysis).
//!
//! Answer keys are derived mechanically from the embedded programs, and
//! student responses are marked all-or-nothing.

mod bank;
mod grading;
mod key;

use std::fmt;
use std::str::FromStr;

use crate::algolang::{Direction, ExploreError, InputDomain, Program, RuntimeError, TraceMetric};

pub use bank::{parse_bank, Bank, BankSettings, DetectionRules};
pub use grading::{
    grade, grade_sheet, parse_responses, Diagnostic, DiagnosticKind, GradeSheet, Graded,
    ObjectiveMark, Response, ScoreRow,
};
pub use key::{generate_key, parse_key_file, render_key_file, AnswerKey, KeyAnswer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuestionKind {
    Tracing,
    Detection,
    Comparison,
    Analysis,
}

impl QuestionKind {
    pub const ALL: [QuestionKind; 4] = [
        QuestionKind::Tracing,
        QuestionKind::Detection,
        QuestionKind::Comparison,
        QuestionKind::Analysis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuestionKind::Tracing => "tracing",
            QuestionKind::Detection => "detection",
            QuestionKind::Comparison => "comparison",
            QuestionKind::Analysis => "analysis",
        }
    }

    /// The three reasoning kinds, as opposed to line-by-line tracing.
    pub fn is_reasoning_task(self) -> bool {
        self != QuestionKind::Tracing
    }

    pub fn default_solo(self) -> SoloLevel {
        match self {
            QuestionKind::Tracing => SoloLevel::MultiLevel,
            _ => SoloLevel::Relational,
        }
    }
}

impl fmt::Display for QuestionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuestionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tracing" | "t" => Ok(QuestionKind::Tracing),
            "detection" | "d" => Ok(QuestionKind::Detection),
            "comparison" | "c" => Ok(QuestionKind::Comparison),
            "analysis" | "a" => Ok(QuestionKind::Analysis),
            other => Err(format!("unknown question kind `{other}`")),
        }
    }
}

/// SOLO taxonomy level, kept as metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SoloLevel {
    MultiLevel,
    Relational,
}

impl SoloLevel {
    pub fn name(self) -> &'static str {
        match self {
            SoloLevel::MultiLevel => "multi-level",
            SoloLevel::Relational => "relational",
        }
    }
}

impl FromStr for SoloLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "multi-level" | "multilevel" | "multistructural" => Ok(SoloLevel::MultiLevel),
            "relational" => Ok(SoloLevel::Relational),
            other => Err(format!("unknown SOLO level `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Payload {
    Tracing {
        program: Program,
        input: Vec<i64>,
    },
    Detection {
        program: Program,
        inputs: Vec<Vec<i64>>,
    },
    /// Candidate 0 is the reference the student compares the others with.
    Comparison {
        candidates: Vec<Program>,
        domain: InputDomain,
    },
    Analysis {
        program: Program,
        domain: InputDomain,
        metric: TraceMetric,
        direction: Direction,
        options: Vec<Vec<i64>>,
    },
}

#[derive(Debug, Clone)]
pub struct Question {
    pub id: String,
    pub solo: SoloLevel,
    pub payload: Payload,
    /// Line of the question header in its bank file (0 when built in code).
    pub line: usize,
}

impl Question {
    pub fn kind(&self) -> QuestionKind {
        match self.payload {
            Payload::Tracing { .. } => QuestionKind::Tracing,
            Payload::Detection { .. } => QuestionKind::Detection,
            Payload::Comparison { .. } => QuestionKind::Comparison,
            Payload::Analysis { .. } => QuestionKind::Analysis,
        }
    }

    pub fn validate(&self, rules: &DetectionRules) -> Result<(), InstrumentError> {
        let invalid = |message: String| InstrumentError::InvalidQuestion {
            question: self.id.clone(),
            message,
        };
        match &self.payload {
            Payload::Tracing { .. } => Ok(()),
            Payload::Detection { inputs, .. } => {
                if inputs.len() < rules.min_inputs {
                    return Err(invalid(format!(
                        "detection needs at least {} inputs, found {}",
                        rules.min_inputs,
                        inputs.len()
                    )));
                }
                if let Some(short) = inputs.iter().position(|i| i.len() < rules.min_length) {
                    return Err(invalid(format!(
                        "detection input {} has length {}, below the minimum of {}",
                        short + 1,
                        inputs[short].len(),
                        rules.min_length
                    )));
                }
                Ok(())
            }
            Payload::Comparison { candidates, domain } => {
                if candidates.len() < 2 {
                    return Err(invalid("comparison needs at least two candidate programs".into()));
                }
                domain.check_enumerable().map_err(|e| invalid(e.to_string()))
            }
            Payload::Analysis {
                domain, options, ..
            } => {
                domain.check_enumerable().map_err(|e| invalid(e.to_string()))?;
                if options.is_empty() {
                    return Err(invalid("analysis question has no options".into()));
                }
                for (i, option) in options.iter().enumerate() {
                    if !domain.contains(option) {
                        return Err(invalid(format!(
                            "option {} {:?} lies outside the domain {domain}",
                            option_letter(i),
                            option
                        )));
                    }
                    if options[..i].contains(option) {
                        return Err(invalid(format!(
                            "option {} repeats an earlier option",
                            option_letter(i)
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// `A`, `B`, ... for option indices.
pub fn option_letter(index: usize) -> String {
    if index < 26 {
        ((b'A' + index as u8) as char).to_string()
    } else {
        format!("#{index}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstrumentError {
    #[error("bank line {line}: {message}")]
    Bank { line: usize, message: String },
    #[error("question `{question}`: {message}")]
    InvalidQuestion { question: String, message: String },
    #[error("question `{question}`: options {options:?} tie for the extremal value {value}")]
    AmbiguousKey {
        question: String,
        options: Vec<String>,
        value: u64,
    },
    #[error("question `{question}`: no option attains the extremal value {value}")]
    NoCorrectOption { question: String, value: u64 },
    #[error("question `{question}`: program fails on input {input:?}: {error}")]
    KeyExecution {
        question: String,
        input: Vec<i64>,
        error: RuntimeError,
    },
    #[error("question `{question}`: {error}")]
    Explore {
        question: String,
        error: ExploreError,
    },
    #[error("key does not belong to question `{0}`")]
    KeyMismatch(String),
    #[error("responses line {line}: unknown question `{question}`")]
    UnknownQuestion { question: String, line: usize },
    #[error("duplicate response by `{student}` to `{question}` on lines {first} and {second}")]
    DuplicateResponse {
        student: String,
        question: String,
        first: usize,
        second: usize,
    },
    #[error("responses line {line}: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("key file line {line}: {message}")]
    KeyFile { line: usize, message: String },
}
