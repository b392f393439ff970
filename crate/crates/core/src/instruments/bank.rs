use crate::algolang::{
    parse_named, Direction, InputDomain, Program, TraceMetric, Value, DEFAULT_STEP_LIMIT,
};

use super::{generate_key, AnswerKey, InstrumentError, Payload, Question, QuestionKind, SoloLevel};

/// Minimum shape of a detection question's inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionRules {
    pub min_inputs: usize,
    pub min_length: usize,
}

impl Default for DetectionRules {
    fn default() -> Self {
        DetectionRules {
            min_inputs: 6,
            min_length: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BankSettings {
    pub detection: DetectionRules,
    pub step_limit: u64,
}

impl Default for BankSettings {
    fn default() -> Self {
        BankSettings {
            detection: DetectionRules::default(),
            step_limit: DEFAULT_STEP_LIMIT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bank {
    pub settings: BankSettings,
    pub questions: Vec<Question>,
}

impl Bank {
    pub fn question(&self, id: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn kinds(&self) -> Vec<QuestionKind> {
        self.questions.iter().map(Question::kind).collect()
    }

    /// Validates every question and generates its key, failing on the first
    /// problem.
    pub fn keyed(&self) -> Result<Vec<(Question, AnswerKey)>, InstrumentError> {
        self.questions
            .iter()
            .map(|q| {
                q.validate(&self.settings.detection)?;
                let key = generate_key(q, self.settings.step_limit)?;
                Ok((q.clone(), key))
            })
            .collect()
    }

    /// Every validation or key-generation problem in the bank.
    pub fn check(&self) -> Vec<InstrumentError> {
        self.questions
            .iter()
            .filter_map(|q| {
                q.validate(&self.settings.detection)
                    .and_then(|_| generate_key(q, self.settings.step_limit))
                    .err()
            })
            .collect()
    }
}

#[derive(Default)]
struct Draft {
    line: usize,
    id: Option<String>,
    kind: Option<QuestionKind>,
    solo: Option<SoloLevel>,
    input: Option<Vec<i64>>,
    inputs: Vec<Vec<i64>>,
    domain: Option<InputDomain>,
    metric: Option<TraceMetric>,
    direction: Option<Direction>,
    options: Vec<Vec<i64>>,
    programs: Vec<Program>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Bank,
    Question,
}

/// Which list a bare `[..]` continuation line extends.
#[derive(Clone, Copy, PartialEq, Eq)]
enum ListKey {
    None,
    Inputs,
    Options,
}

fn bank_error(line: usize, message: impl Into<String>) -> InstrumentError {
    InstrumentError::Bank {
        line,
        message: message.into(),
    }
}

fn parse_array(text: &str, line: usize) -> Result<Vec<i64>, InstrumentError> {
    match text.parse::<Value>() {
        Ok(Value::Array(items)) => Ok(items),
        Ok(other) => Err(bank_error(line, format!("expected an array, found {other}"))),
        Err(e) => Err(bank_error(line, e.to_string())),
    }
}

/// Parses a question bank document.
///
/// ```text
/// [bank]
/// detection_min_inputs = 6
///
/// [question]
/// id = q04
/// kind = detection
/// inputs = [3,1,4,1,5,9,2]
/// inputs = [2,7,1,8,2,8,1]
/// ---
/// return input
/// ---
/// ```
///
/// A `---` line opens and closes an embedded program; comparison questions
/// list several fenced programs, the first being the reference.
pub fn parse_bank(text: &str) -> Result<Bank, InstrumentError> {
    let mut settings = BankSettings::default();
    let mut questions = Vec::new();
    let mut section = Section::None;
    let mut draft: Option<Draft> = None;
    let mut list = ListKey::None;
    let mut fence: Option<(usize, String)> = None;

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        if let Some((start, body)) = fence.as_mut() {
            if raw.trim() == "---" {
                let d = draft
                    .as_mut()
                    .ok_or_else(|| bank_error(*start, "program outside a [question] section"))?;
                let id = d.id.clone().unwrap_or_else(|| "question".into());
                let name = format!("{id}#{}", d.programs.len());
                let program = parse_named(&name, body).map_err(|e| {
                    let e = e.offset_lines(*start);
                    bank_error(e.line(), format!("in program {name}: {e}"))
                })?;
                d.programs.push(program);
                fence = None;
            } else {
                body.push_str(raw);
                body.push('\n');
            }
            continue;
        }

        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "---" {
            if section != Section::Question {
                return Err(bank_error(line_no, "program fence outside a [question] section"));
            }
            fence = Some((line_no, String::new()));
            list = ListKey::None;
            continue;
        }
        if is_section_header(line) {
            if let Some(d) = draft.take() {
                questions.push(finish(d)?);
            }
            list = ListKey::None;
            section = match &line[1..line.len() - 1] {
                "bank" => Section::Bank,
                "question" => {
                    draft = Some(Draft {
                        line: line_no,
                        ..Draft::default()
                    });
                    Section::Question
                }
                other => return Err(bank_error(line_no, format!("unknown section [{other}]"))),
            };
            continue;
        }
        if line.starts_with('[') {
            // Continuation of an `inputs =` / `options =` list.
            let d = draft
                .as_mut()
                .ok_or_else(|| bank_error(line_no, "array outside a [question] section"))?;
            let array = parse_array(line, line_no)?;
            match list {
                ListKey::Inputs => d.inputs.push(array),
                ListKey::Options => d.options.push(array),
                ListKey::None => {
                    return Err(bank_error(line_no, "array line does not follow `inputs =` or `options =`"))
                }
            }
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bank_error(line_no, format!("expected `key = value`, found `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        list = ListKey::None;

        match section {
            Section::None => return Err(bank_error(line_no, "setting before any section header")),
            Section::Bank => {
                let number: u64 = value
                    .parse()
                    .map_err(|_| bank_error(line_no, format!("`{key}` needs a whole number")))?;
                match key {
                    "detection_min_inputs" => settings.detection.min_inputs = number as usize,
                    "detection_min_length" => settings.detection.min_length = number as usize,
                    "step_limit" if number > 0 => settings.step_limit = number,
                    _ => return Err(bank_error(line_no, format!("unknown bank setting `{key}`"))),
                }
            }
            Section::Question => {
                let d = draft.as_mut().expect("question section has a draft");
                match key {
                    "id" => {
                        if value.is_empty() || value.contains(|c: char| c.is_whitespace() || c == ',') {
                            return Err(bank_error(line_no, format!("invalid question id `{value}`")));
                        }
                        d.id = Some(value.to_string());
                    }
                    "kind" => d.kind = Some(value.parse().map_err(|e: String| bank_error(line_no, e))?),
                    "solo" => d.solo = Some(value.parse().map_err(|e: String| bank_error(line_no, e))?),
                    "input" => d.input = Some(parse_array(value, line_no)?),
                    "inputs" | "options" => {
                        list = if key == "inputs" { ListKey::Inputs } else { ListKey::Options };
                        if !value.is_empty() {
                            let array = parse_array(value, line_no)?;
                            if key == "inputs" {
                                d.inputs.push(array);
                            } else {
                                d.options.push(array);
                            }
                        }
                    }
                    "domain" => {
                        d.domain = Some(value.parse().map_err(|e: crate::algolang::ExploreError| bank_error(line_no, e.to_string()))?)
                    }
                    "metric" => d.metric = Some(value.parse().map_err(|e: String| bank_error(line_no, e))?),
                    "direction" => d.direction = Some(value.parse().map_err(|e: String| bank_error(line_no, e))?),
                    _ => return Err(bank_error(line_no, format!("unknown question field `{key}`"))),
                }
            }
        }
    }

    if let Some((start, _)) = fence {
        return Err(bank_error(start, "program fence is never closed"));
    }
    if let Some(d) = draft.take() {
        questions.push(finish(d)?);
    }
    for (i, q) in questions.iter().enumerate() {
        if let Some(prev) = questions[..i].iter().find(|p| p.id == q.id) {
            return Err(bank_error(
                q.line,
                format!("question id `{}` already used at line {}", q.id, prev.line),
            ));
        }
    }
    Ok(Bank {
        settings,
        questions,
    })
}

fn is_section_header(line: &str) -> bool {
    line.strip_prefix('[')
        .and_then(|rest| rest.strip_suffix(']'))
        .is_some_and(|name| !name.is_empty() && name.chars().all(|c| c.is_ascii_alphabetic() || c == '_'))
}

fn finish(d: Draft) -> Result<Question, InstrumentError> {
    let line = d.line;
    let id = d.id.ok_or_else(|| bank_error(line, "question has no `id`"))?;
    let kind = d
        .kind
        .ok_or_else(|| bank_error(line, format!("question `{id}` has no `kind`")))?;
    let need = |what: &str| bank_error(line, format!("{kind} question `{id}` needs {what}"));
    let mut programs = d.programs;
    let single = |programs: &mut Vec<Program>| {
        if programs.len() == 1 {
            Ok(programs.remove(0))
        } else {
            Err(need("exactly one fenced program"))
        }
    };

    let payload = match kind {
        QuestionKind::Tracing => Payload::Tracing {
            program: single(&mut programs)?,
            input: d.input.ok_or_else(|| need("an `input`"))?,
        },
        QuestionKind::Detection => Payload::Detection {
            program: single(&mut programs)?,
            inputs: d.inputs,
        },
        QuestionKind::Comparison => Payload::Comparison {
            candidates: programs,
            domain: d.domain.ok_or_else(|| need("a `domain`"))?,
        },
        QuestionKind::Analysis => Payload::Analysis {
            program: single(&mut programs)?,
            domain: d.domain.ok_or_else(|| need("a `domain`"))?,
            metric: d.metric.ok_or_else(|| need("a `metric`"))?,
            direction: d.direction.ok_or_else(|| need("a `direction`"))?,
            options: d.options,
        },
    };
    Ok(Question {
        id,
        solo: d.solo.unwrap_or(kind.default_solo()),
        payload,
        line,
    })
}
