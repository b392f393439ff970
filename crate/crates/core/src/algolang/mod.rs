//! A small pseudo-code language for the algorithms embedded in questions.
//!
//! ```text
//! set s to 0
//! for i from 0 to length(input) - 1 do
//!   set s to s + input[i]
//! end
//! return s
//! ```
//!
//! Programs read the reserved integer array `input`. Execution is bounded by
//! a step limit and records an [`ExecTrace`] cost model used by analysis
//! questions.

mod ast;
mod explore;
mod interp;
mod lexer;
mod parser;
mod printer;
pub mod samples;

pub use ast::{BinOp, Expr, Program, Stmt, Value, ValueParseError};
pub use explore::{
    equivalent, extremal_input, measure, Direction, DomainInputs, Equivalence, ExploreError,
    Extremal, InputDomain, DEFAULT_ENUMERATION_CAP,
};
pub use interp::{execute, ExecTrace, Execution, Halt, TraceMetric, DEFAULT_STEP_LIMIT};
pub use parser::{parse, parse_named};
pub use printer::{expr_to_string, pretty_print};

/// Name of the array every program receives.
pub const INPUT_VAR: &str = "input";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("variable `{name}` read at {line}:{column} before it is written")]
    UnboundVariable {
        name: String,
        line: usize,
        column: usize,
    },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. } | ParseError::UnboundVariable { line, .. } => *line,
        }
    }

    /// Same error with its line shifted by `offset` (for programs embedded
    /// in a larger file).
    pub fn offset_lines(self, offset: usize) -> ParseError {
        match self {
            ParseError::Syntax {
                line,
                column,
                message,
            } => ParseError::Syntax {
                line: line + offset,
                column,
                message,
            },
            ParseError::UnboundVariable { name, line, column } => ParseError::UnboundVariable {
                name,
                line: line + offset,
                column,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("step limit of {limit} exceeded")]
    StepLimitExceeded { limit: u64 },
    #[error("index {index} out of bounds for array of length {length}")]
    IndexOutOfBounds { index: i64, length: usize },
    #[error("type error: {message}")]
    TypeError { message: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("program finished without returning a value")]
    MissingReturn,
}

impl Program {
    pub fn parse(source: &str) -> Result<Program, ParseError> {
        parse(source)
    }

    pub fn pretty(&self) -> String {
        pretty_print(self)
    }

    pub fn execute(&self, input: &[i64], step_limit: u64) -> Execution {
        execute(self, input, step_limit)
    }
}
