use std::fmt;

/// Binary operators, grouped by precedence in [`BinOp::precedence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

pub(crate) const PREC_OR: u8 = 1;
pub(crate) const PREC_AND: u8 = 2;
pub(crate) const PREC_NOT: u8 = 3;
pub(crate) const PREC_CMP: u8 = 4;
pub(crate) const PREC_ADD: u8 = 5;
pub(crate) const PREC_MUL: u8 = 6;
pub(crate) const PREC_UNARY: u8 = 7;
pub(crate) const PREC_POSTFIX: u8 = 8;
pub(crate) const PREC_ATOM: u8 = 9;

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => PREC_OR,
            BinOp::And => PREC_AND,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => PREC_CMP,
            BinOp::Add | BinOp::Sub => PREC_ADD,
            BinOp::Mul | BinOp::Div | BinOp::Mod => PREC_MUL,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == PREC_CMP
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Array(Vec<Expr>),
    Length(Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Append(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub(crate) fn precedence(&self) -> u8 {
        match self {
            Expr::Int(n) if *n < 0 => PREC_UNARY,
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) | Expr::Array(_) => PREC_ATOM,
            Expr::Length(_) | Expr::Append(..) => PREC_ATOM,
            Expr::Index(..) => PREC_POSTFIX,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Not(_) => PREC_NOT,
            Expr::Binary(op, ..) => op.precedence(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    /// `set name to value`
    Set { name: String, value: Expr },
    /// `set name[index] to value`
    SetIndex {
        name: String,
        index: Expr,
        value: Expr,
    },
    /// `swap(name, i, j)`
    Swap { name: String, i: Expr, j: Expr },
    /// `for var from start to stop do ... end`, bounds inclusive.
    For {
        var: String,
        start: Expr,
        stop: Expr,
        body: Vec<Stmt>,
    },
    While { cond: Expr, body: Vec<Stmt> },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
    },
    Return(Expr),
}

/// A parsed pseudo-code algorithm.
///
/// Equality via [`Program::same_structure`] ignores the name and the
/// original source text.
#[derive(Debug, Clone)]
pub struct Program {
    pub name: String,
    pub source: String,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn same_structure(&self, other: &Program) -> bool {
        self.body == other.body
    }
}

/// Runtime value. Arrays hold integers only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Array(Vec<i64>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Bool(_) => "boolean",
            Value::Array(_) => "array",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueParseError {
    #[error("empty value")]
    Empty,
    #[error("invalid integer `{0}`")]
    BadInteger(String),
    #[error("unterminated array `{0}`")]
    Unterminated(String),
}

impl std::str::FromStr for Value {
    type Err = ValueParseError;

    /// Parses `42`, `-3`, `true`, `false`, `[1, 2, 3]` or `[]`, ignoring
    /// surrounding whitespace.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        if text.is_empty() {
            return Err(ValueParseError::Empty);
        }
        match text {
            "true" => return Ok(Value::Bool(true)),
            "false" => return Ok(Value::Bool(false)),
            _ => {}
        }
        if let Some(rest) = text.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| ValueParseError::Unterminated(text.to_string()))?;
            if inner.trim().is_empty() {
                return Ok(Value::Array(Vec::new()));
            }
            let items = inner
                .split(',')
                .map(|item| parse_int(item.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Value::Array(items));
        }
        parse_int(text).map(Value::Int)
    }
}

fn parse_int(text: &str) -> Result<i64, ValueParseError> {
    text.parse::<i64>()
        .map_err(|_| ValueParseError::BadInteger(text.to_string()))
}
