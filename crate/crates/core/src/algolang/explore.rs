//! Exhaustive exploration of a program's behaviour over a bounded input
//! domain: behavioural equivalence and best/worst-case inputs.

use std::fmt;

use super::ast::{Program, Value};
use super::interp::{execute, TraceMetric};
use super::RuntimeError;

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// All integer arrays with length in `len_lo..=len_hi` and every element in
/// `val_lo..=val_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputDomain {
    pub len_lo: usize,
    pub len_hi: usize,
    pub val_lo: i64,
    pub val_hi: i64,
    pub enumeration_cap: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExploreError {
    #[error("invalid input domain: {0}")]
    InvalidDomain(String),
    #[error("input domain has {cases} cases, above the enumeration cap of {cap}")]
    EnumerationCapExceeded { cases: u128, cap: u64 },
    #[error("program `{program}` fails on input {input:?}: {error}")]
    RuntimeErrorInDomain {
        program: String,
        input: Vec<i64>,
        error: RuntimeError,
    },
}

impl InputDomain {
    pub fn new(len_lo: usize, len_hi: usize, val_lo: i64, val_hi: i64) -> Result<Self, ExploreError> {
        let domain = InputDomain {
            len_lo,
            len_hi,
            val_lo,
            val_hi,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        };
        domain.validate()?;
        Ok(domain)
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<(), ExploreError> {
        if self.len_lo > self.len_hi {
            return Err(ExploreError::InvalidDomain(format!(
                "length range {}..{} is empty",
                self.len_lo, self.len_hi
            )));
        }
        if self.val_lo > self.val_hi {
            return Err(ExploreError::InvalidDomain(format!(
                "value range {}..{} is empty",
                self.val_lo, self.val_hi
            )));
        }
        Ok(())
    }

    /// Number of distinct values an element can take.
    fn radix(&self) -> u128 {
        (self.val_hi as i128 - self.val_lo as i128 + 1) as u128
    }

    /// Σ over lengths of radix^length, saturating at `u128::MAX`.
    pub fn total_cases(&self) -> u128 {
        let radix = self.radix();
        let mut total: u128 = 0;
        for len in self.len_lo..=self.len_hi {
            let count = u32::try_from(len)
                .ok()
                .and_then(|l| radix.checked_pow(l))
                .unwrap_or(u128::MAX);
            total = total.saturating_add(count);
            if total == u128::MAX {
                break;
            }
        }
        total
    }

    /// Fails unless the whole domain fits under the enumeration cap.
    pub fn check_enumerable(&self) -> Result<(), ExploreError> {
        self.validate()?;
        let cases = self.total_cases();
        if cases > self.enumeration_cap as u128 {
            return Err(ExploreError::EnumerationCapExceeded {
                cases,
                cap: self.enumeration_cap,
            });
        }
        Ok(())
    }

    pub fn contains(&self, input: &[i64]) -> bool {
        (self.len_lo..=self.len_hi).contains(&input.len())
            && input.iter().all(|v| (self.val_lo..=self.val_hi).contains(v))
    }

    /// Inputs in enumeration order: shorter arrays first, then lexicographic.
    pub fn inputs(&self) -> DomainInputs {
        DomainInputs {
            domain: *self,
            current: Some(vec![self.val_lo; self.len_lo]),
        }
    }
}

impl fmt::Display for InputDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "len:{}..{},val:{}..{}",
            self.len_lo, self.len_hi, self.val_lo, self.val_hi
        )
    }
}

impl std::str::FromStr for InputDomain {
    type Err = ExploreError;

    /// Parses `len:1..4,val:0..3`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || ExploreError::InvalidDomain(format!("cannot parse domain `{text}`"));
        let mut len = None;
        let mut val = None;
        for part in text.split(',') {
            let (key, range) = part.trim().split_once(':').ok_or_else(bad)?;
            let (lo, hi) = range.trim().split_once("..").ok_or_else(bad)?;
            match key.trim() {
                "len" => {
                    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                    len = Some((lo, hi));
                }
                "val" => {
                    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
                    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
                    val = Some((lo, hi));
                }
                _ => return Err(bad()),
            }
        }
        let (len_lo, len_hi) = len.ok_or_else(bad)?;
        let (val_lo, val_hi) = val.ok_or_else(bad)?;
        InputDomain::new(len_lo, len_hi, val_lo, val_hi)
    }
}

/// Odometer over a domain's inputs.
pub struct DomainInputs {
    domain: InputDomain,
    current: Option<Vec<i64>>,
}

impl Iterator for DomainInputs {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let mut pos = next.len();
        loop {
            if pos == 0 {
                // Rolled over: move on to the next length.
                let len = next.len() + 1;
                if len <= self.domain.len_hi {
                    self.current = Some(vec![self.domain.val_lo; len]);
                }
                break;
            }
            pos -= 1;
            if next[pos] < self.domain.val_hi {
                next[pos] += 1;
                self.current = Some(next);
                break;
            }
            next[pos] = self.domain.val_lo;
        }
        Some(out)
    }
}

/// Outcome of an equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    /// First input, in enumeration order, on which the programs disagree.
    pub counterexample: Option<Vec<i64>>,
}

/// Two runs agree when both return the same value, or both fail.
fn outcomes_agree(a: &Result<Value, RuntimeError>, b: &Result<Value, RuntimeError>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x == y,
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

pub fn equivalent(
    first: &Program,
    second: &Program,
    domain: &InputDomain,
    step_limit: u64,
) -> Result<Equivalence, ExploreError> {
    domain.check_enumerable()?;
    for input in domain.inputs() {
        let a = execute(first, &input, step_limit).outcome;
        let b = execute(second, &input, step_limit).outcome;
        if !outcomes_agree(&a, &b) {
            return Ok(Equivalence {
                equivalent: false,
                counterexample: Some(input),
            });
        }
    }
    Ok(Equivalence {
        equivalent: true,
        counterexample: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Minimise the metric.
    Best,
    /// Maximise the metric.
    Worst,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "best" => Ok(Direction::Best),
            "worst" => Ok(Direction::Worst),
            other => Err(format!("unknown direction `{other}` (expected best or worst)")),
        }
    }
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Best => "best",
            Direction::Worst => "worst",
        }
    }

    /// True when `candidate` is strictly better than `incumbent`.
    pub fn improves(self, candidate: u64, incumbent: u64) -> bool {
        match self {
            Direction::Best => candidate < incumbent,
            Direction::Worst => candidate > incumbent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extremal {
    /// First input in enumeration order attaining `metric_value`.
    pub input: Vec<i64>,
    pub metric_value: u64,
    /// False when two or more inputs attain `metric_value`.
    pub unique: bool,
}

/// Measures `metric` for one input, failing if the program does not return.
pub fn measure(
    program: &Program,
    input: &[i64],
    metric: TraceMetric,
    step_limit: u64,
) -> Result<u64, ExploreError> {
    let run = execute(program, input, step_limit);
    match run.outcome {
        Ok(_) => Ok(metric.read(&run.trace)),
        Err(error) => Err(ExploreError::RuntimeErrorInDomain {
            program: program.name.clone(),
            input: input.to_vec(),
            error,
        }),
    }
}

pub fn extremal_input(
    program: &Program,
    domain: &InputDomain,
    metric: TraceMetric,
    direction: Direction,
    step_limit: u64,
) -> Result<Extremal, ExploreError> {
    domain.check_enumerable()?;
    let mut best: Option<Extremal> = None;
    for input in domain.inputs() {
        let value = measure(program, &input, metric, step_limit)?;
        match &mut best {
            None => {
                best = Some(Extremal {
                    input,
                    metric_value: value,
                    unique: true,
                })
            }
            Some(current) => {
                if direction.improves(value, current.metric_value) {
                    *current = Extremal {
                        input,
                        metric_value: value,
                        unique: true,
                    };
                } else if value == current.metric_value {
                    current.unique = false;
                }
            }
        }
    }
    best.ok_or_else(|| ExploreError::InvalidDomain("domain is empty".into()))
}
