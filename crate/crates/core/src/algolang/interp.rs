use std::collections::HashMap;

use super::ast::{BinOp, Expr, Program, Stmt, Value};
use super::{RuntimeError, INPUT_VAR};

/// Why an execution stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Halt {
    Returned,
    StepLimit,
    RuntimeError,
}

/// Cost counters collected while executing a program.
///
/// `statements_executed` counts every executed statement plus every loop
/// condition evaluation; `comparisons` counts evaluations of `<`, `<=`, `>`,
/// `>=`, `==` and `!=`; `array_writes` counts indexed assignments, swaps and
/// appends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecTrace {
    pub statements_executed: u64,
    pub comparisons: u64,
    pub array_writes: u64,
    pub halted: Halt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceMetric {
    StatementsExecuted,
    Comparisons,
    ArrayWrites,
}

impl TraceMetric {
    pub fn read(self, trace: &ExecTrace) -> u64 {
        match self {
            TraceMetric::StatementsExecuted => trace.statements_executed,
            TraceMetric::Comparisons => trace.comparisons,
            TraceMetric::ArrayWrites => trace.array_writes,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TraceMetric::StatementsExecuted => "statements",
            TraceMetric::Comparisons => "comparisons",
            TraceMetric::ArrayWrites => "array_writes",
        }
    }
}

impl std::str::FromStr for TraceMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "statements" | "statements_executed" => Ok(TraceMetric::StatementsExecuted),
            "comparisons" => Ok(TraceMetric::Comparisons),
            "array_writes" | "writes" => Ok(TraceMetric::ArrayWrites),
            other => Err(format!("unknown trace metric `{other}`")),
        }
    }
}

/// Result of one run: the outcome plus the counters at the point it stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub outcome: Result<Value, RuntimeError>,
    pub trace: ExecTrace,
}

impl Execution {
    pub fn into_result(self) -> Result<(Value, ExecTrace), RuntimeError> {
        let trace = self.trace;
        self.outcome.map(|v| (v, trace))
    }
}

pub const DEFAULT_STEP_LIMIT: u64 = 100_000;

/// Runs `program` with `input` bound to the reserved array variable.
pub fn execute(program: &Program, input: &[i64], step_limit: u64) -> Execution {
    let mut machine = Machine {
        env: HashMap::from([(INPUT_VAR.to_string(), Value::Array(input.to_vec()))]),
        steps: 0,
        comparisons: 0,
        array_writes: 0,
        step_limit,
    };
    let outcome = match machine.run_block(&program.body) {
        Ok(Flow::Return(v)) => Ok(v),
        Ok(Flow::Next) => Err(RuntimeError::MissingReturn),
        Err(e) => Err(e),
    };
    let halted = match &outcome {
        Ok(_) => Halt::Returned,
        Err(RuntimeError::StepLimitExceeded { .. }) => Halt::StepLimit,
        Err(_) => Halt::RuntimeError,
    };
    Execution {
        outcome,
        trace: ExecTrace {
            statements_executed: machine.steps,
            comparisons: machine.comparisons,
            array_writes: machine.array_writes,
            halted,
        },
    }
}

enum Flow {
    Next,
    Return(Value),
}

struct Machine {
    env: HashMap<String, Value>,
    steps: u64,
    comparisons: u64,
    array_writes: u64,
    step_limit: u64,
}

fn type_error(message: impl Into<String>) -> RuntimeError {
    RuntimeError::TypeError {
        message: message.into(),
    }
}

fn checked_index(index: i64, len: usize) -> Result<usize, RuntimeError> {
    usize::try_from(index)
        .ok()
        .filter(|&i| i < len)
        .ok_or(RuntimeError::IndexOutOfBounds { index, length: len })
}

impl Machine {
    fn tick(&mut self) -> Result<(), RuntimeError> {
        if self.steps >= self.step_limit {
            return Err(RuntimeError::StepLimitExceeded {
                limit: self.step_limit,
            });
        }
        self.steps += 1;
        Ok(())
    }

    fn run_block(&mut self, stmts: &[Stmt]) -> Result<Flow, RuntimeError> {
        for stmt in stmts {
            if let Flow::Return(v) = self.run_stmt(stmt)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn run_stmt(&mut self, stmt: &Stmt) -> Result<Flow, RuntimeError> {
        self.tick()?;
        match stmt {
            Stmt::Set { name, value } => {
                let v = self.eval(value)?;
                self.env.insert(name.clone(), v);
            }
            Stmt::SetIndex { name, index, value } => {
                let i = self.eval_int(index)?;
                let v = self.eval_int(value)?;
                let array = self.array_mut(name)?;
                let slot = checked_index(i, array.len())?;
                array[slot] = v;
                self.array_writes += 1;
            }
            Stmt::Swap { name, i, j } => {
                let i = self.eval_int(i)?;
                let j = self.eval_int(j)?;
                let array = self.array_mut(name)?;
                let a = checked_index(i, array.len())?;
                let b = checked_index(j, array.len())?;
                array.swap(a, b);
                self.array_writes += 1;
            }
            Stmt::For {
                var,
                start,
                stop,
                body,
            } => {
                let mut counter = self.eval_int(start)?;
                let stop = self.eval_int(stop)?;
                loop {
                    self.tick()?;
                    self.env.insert(var.clone(), Value::Int(counter));
                    if counter > stop {
                        break;
                    }
                    if let Flow::Return(v) = self.run_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                    counter = counter.checked_add(1).ok_or(RuntimeError::Overflow)?;
                }
            }
            Stmt::While { cond, body } => loop {
                self.tick()?;
                if !self.eval_bool(cond)? {
                    break;
                }
                if let Flow::Return(v) = self.run_block(body)? {
                    return Ok(Flow::Return(v));
                }
            },
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let flow = if self.eval_bool(cond)? {
                    self.run_block(then_branch)?
                } else if let Some(branch) = else_branch {
                    self.run_block(branch)?
                } else {
                    Flow::Next
                };
                return Ok(flow);
            }
            Stmt::Return(e) => return Ok(Flow::Return(self.eval(e)?)),
        }
        Ok(Flow::Next)
    }

    fn lookup(&self, name: &str) -> Result<&Value, RuntimeError> {
        self.env
            .get(name)
            .ok_or_else(|| RuntimeError::UnboundVariable(name.to_string()))
    }

    fn array_mut(&mut self, name: &str) -> Result<&mut Vec<i64>, RuntimeError> {
        match self.env.get_mut(name) {
            Some(Value::Array(items)) => Ok(items),
            Some(other) => Err(type_error(format!(
                "cannot index `{name}`: it holds an {}",
                other.type_name()
            ))),
            None => Err(RuntimeError::UnboundVariable(name.to_string())),
        }
    }

    fn eval_int(&mut self, e: &Expr) -> Result<i64, RuntimeError> {
        match self.eval(e)? {
            Value::Int(n) => Ok(n),
            other => Err(type_error(format!(
                "expected an integer, found {}",
                other.type_name()
            ))),
        }
    }

    fn eval_bool(&mut self, e: &Expr) -> Result<bool, RuntimeError> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            other => Err(type_error(format!(
                "expected a boolean condition, found {}",
                other.type_name()
            ))),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, RuntimeError> {
        match e {
            Expr::Int(n) => Ok(Value::Int(*n)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Var(name) => self.lookup(name).cloned(),
            Expr::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.eval_int(item)?);
                }
                Ok(Value::Array(out))
            }
            Expr::Length(inner) => {
                if let Expr::Var(name) = inner.as_ref() {
                    return match self.lookup(name)? {
                        Value::Array(items) => Ok(Value::Int(items.len() as i64)),
                        other => Err(type_error(format!(
                            "length() needs an array, found {}",
                            other.type_name()
                        ))),
                    };
                }
                match self.eval(inner)? {
                    Value::Array(items) => Ok(Value::Int(items.len() as i64)),
                    other => Err(type_error(format!(
                        "length() needs an array, found {}",
                        other.type_name()
                    ))),
                }
            }
            Expr::Index(base, index) => {
                let i = self.eval_int(index)?;
                // Borrow named arrays in place instead of cloning them.
                if let Expr::Var(name) = base.as_ref() {
                    return match self.lookup(name)? {
                        Value::Array(items) => Ok(Value::Int(items[checked_index(i, items.len())?])),
                        other => Err(type_error(format!(
                            "cannot index an {}",
                            other.type_name()
                        ))),
                    };
                }
                match self.eval(base)? {
                    Value::Array(items) => Ok(Value::Int(items[checked_index(i, items.len())?])),
                    other => Err(type_error(format!(
                        "cannot index an {}",
                        other.type_name()
                    ))),
                }
            }
            Expr::Append(array, item) => {
                let mut items = match self.eval(array)? {
                    Value::Array(items) => items,
                    other => {
                        return Err(type_error(format!(
                            "append() needs an array, found {}",
                            other.type_name()
                        )))
                    }
                };
                items.push(self.eval_int(item)?);
                self.array_writes += 1;
                Ok(Value::Array(items))
            }
            Expr::Neg(inner) => {
                let n = self.eval_int(inner)?;
                n.checked_neg().map(Value::Int).ok_or(RuntimeError::Overflow)
            }
            Expr::Not(inner) => Ok(Value::Bool(!self.eval_bool(inner)?)),
            Expr::Binary(op, lhs, rhs) => self.eval_binary(*op, lhs, rhs),
        }
    }

    fn eval_binary(&mut self, op: BinOp, lhs: &Expr, rhs: &Expr) -> Result<Value, RuntimeError> {
        match op {
            BinOp::And => {
                let l = self.eval_bool(lhs)?;
                Ok(Value::Bool(l && self.eval_bool(rhs)?))
            }
            BinOp::Or => {
                let l = self.eval_bool(lhs)?;
                Ok(Value::Bool(l || self.eval_bool(rhs)?))
            }
            BinOp::Eq | BinOp::Ne => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                if std::mem::discriminant(&l) != std::mem::discriminant(&r) {
                    return Err(type_error(format!(
                        "cannot compare {} with {}",
                        l.type_name(),
                        r.type_name()
                    )));
                }
                self.comparisons += 1;
                Ok(Value::Bool((l == r) == (op == BinOp::Eq)))
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let l = self.eval_int(lhs)?;
                let r = self.eval_int(rhs)?;
                self.comparisons += 1;
                Ok(Value::Bool(match op {
                    BinOp::Lt => l < r,
                    BinOp::Le => l <= r,
                    BinOp::Gt => l > r,
                    _ => l >= r,
                }))
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                let l = self.eval_int(lhs)?;
                let r = self.eval_int(rhs)?;
                let value = match op {
                    BinOp::Add => l.checked_add(r),
                    BinOp::Sub => l.checked_sub(r),
                    BinOp::Mul => l.checked_mul(r),
                    BinOp::Div | BinOp::Mod if r == 0 => return Err(RuntimeError::DivisionByZero),
                    // Both truncate toward zero.
                    BinOp::Div => l.checked_div(r),
                    _ => l.checked_rem(r),
                };
                value.map(Value::Int).ok_or(RuntimeError::Overflow)
            }
        }
    }
}
