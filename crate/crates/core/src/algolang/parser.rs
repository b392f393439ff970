use std::collections::BTreeSet;

use super::ast::{BinOp, Expr, Program, Stmt};
use super::lexer::{tokenize, Kw, Tok, Token};
use super::{ParseError, INPUT_VAR};

/// Parses pseudo-code into a [`Program`] named `main`.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    parse_named("main", source)
}

pub fn parse_named(name: &str, source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        bound: BTreeSet::from([INPUT_VAR.to_string()]),
    };
    if parser.peek() == &Tok::Eof {
        let t = parser.current();
        return Err(ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: "expected a statement, found end of input (empty program)".into(),
        });
    }
    let body = parser.block()?;
    if parser.peek() != &Tok::Eof {
        return Err(parser.unexpected("a statement"));
    }
    Ok(Program {
        name: name.to_string(),
        source: source.to_string(),
        body,
    })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Variables definitely written on every path reaching the cursor.
    bound: BTreeSet<String>,
}

impl Parser {
    fn current(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.current();
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message: format!("expected {expected}, found {}", t.tok.describe()),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn expect_kw(&mut self, kw: Kw) -> Result<Token, ParseError> {
        self.expect(Tok::Kw(kw))
    }

    fn ident(&mut self) -> Result<(String, Token), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => Ok((name, self.advance())),
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn require_bound(&self, name: &str, at: &Token) -> Result<(), ParseError> {
        if self.bound.contains(name) {
            Ok(())
        } else {
            Err(ParseError::UnboundVariable {
                name: name.to_string(),
                line: at.line,
                column: at.column,
            })
        }
    }

    /// Statements up to (not including) `end`, `else` or end of input.
    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                Tok::Kw(Kw::End) | Tok::Kw(Kw::Else) | Tok::Eof => return Ok(stmts),
                _ => stmts.push(self.statement()?),
            }
        }
    }

    fn close_block(&mut self, opener: &Token) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            let t = self.current();
            return Err(ParseError::Syntax {
                line: t.line,
                column: t.column,
                message: format!(
                    "expected `end` closing block opened at line {}, found end of input",
                    opener.line
                ),
            });
        }
        self.expect_kw(Kw::End).map(|_| ())
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        match self.peek() {
            Tok::Kw(Kw::Set) => self.set_stmt(),
            Tok::Kw(Kw::Swap) => self.swap_stmt(),
            Tok::Kw(Kw::For) => self.for_stmt(),
            Tok::Kw(Kw::While) => self.while_stmt(),
            Tok::Kw(Kw::If) => self.if_stmt(),
            Tok::Kw(Kw::Return) => {
                self.advance();
                Ok(Stmt::Return(self.expr()?))
            }
            _ => Err(self.unexpected("a statement")),
        }
    }

    fn set_stmt(&mut self) -> Result<Stmt, ParseError> {
        self.expect_kw(Kw::Set)?;
        let (name, name_tok) = self.ident()?;
        if *self.peek() == Tok::LBracket {
            self.require_bound(&name, &name_tok)?;
            self.advance();
            let index = self.expr()?;
            self.expect(Tok::RBracket)?;
            self.expect_kw(Kw::To)?;
            let value = self.expr()?;
            return Ok(Stmt::SetIndex { name, index, value });
        }
        self.expect_kw(Kw::To)?;
        let value = self.expr()?;
        self.bound.insert(name.clone());
        Ok(Stmt::Set { name, value })
    }

    fn swap_stmt(&mut self) -> Result<Stmt, ParseError> {
        self.expect_kw(Kw::Swap)?;
        self.expect(Tok::LParen)?;
        let (name, name_tok) = self.ident()?;
        self.require_bound(&name, &name_tok)?;
        self.expect(Tok::Comma)?;
        let i = self.expr()?;
        self.expect(Tok::Comma)?;
        let j = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(Stmt::Swap { name, i, j })
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseError> {
        let opener = self.expect_kw(Kw::For)?;
        let (var, _) = self.ident()?;
        self.expect_kw(Kw::From)?;
        let start = self.expr()?;
        self.expect_kw(Kw::To)?;
        let stop = self.expr()?;
        self.expect_kw(Kw::Do)?;
        let before = self.bound.clone();
        self.bound.insert(var.clone());
        let body = self.block()?;
        self.close_block(&opener)?;
        // The loop variable is written even when the body never runs.
        self.bound = before;
        self.bound.insert(var.clone());
        Ok(Stmt::For {
            var,
            start,
            stop,
            body,
        })
    }

    fn while_stmt(&mut self) -> Result<Stmt, ParseError> {
        let opener = self.expect_kw(Kw::While)?;
        let cond = self.expr()?;
        self.expect_kw(Kw::Do)?;
        let before = self.bound.clone();
        let body = self.block()?;
        self.close_block(&opener)?;
        self.bound = before;
        Ok(Stmt::While { cond, body })
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let opener = self.expect_kw(Kw::If)?;
        let cond = self.expr()?;
        self.expect_kw(Kw::Then)?;
        let before = self.bound.clone();
        let then_branch = self.block()?;
        let after_then = std::mem::replace(&mut self.bound, before.clone());
        let else_branch = if *self.peek() == Tok::Kw(Kw::Else) {
            self.advance();
            let branch = self.block()?;
            Some(branch)
        } else {
            None
        };
        self.close_block(&opener)?;
        let after_else = std::mem::replace(&mut self.bound, before);
        if else_branch.is_some() {
            self.bound = after_then.intersection(&after_else).cloned().collect();
        }
        Ok(Stmt::If {
            cond,
            then_branch,
            else_branch,
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::Kw(Kw::Or) {
            self.advance();
            let rhs = self.and_expr()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_expr()?;
        while *self.peek() == Tok::Kw(Kw::And) {
            self.advance();
            let rhs = self.not_expr()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Kw(Kw::Not) {
            self.advance();
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.add_expr()?;
        if matches!(
            self.peek(),
            Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::EqEq | Tok::NotEq
        ) {
            return Err(self.unexpected("`and`, `or` or a closing token (comparisons do not chain)"));
        }
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.mul_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Kw(Kw::Mod) => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() != Tok::Minus {
            return self.postfix_expr();
        }
        self.advance();
        // `-<digits>` is a negative literal rather than a negation.
        if let Tok::Int(n) = *self.peek() {
            let t = self.advance();
            let value = 0i64.checked_sub_unsigned(n).ok_or_else(|| ParseError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("integer literal `-{n}` is too large"),
            })?;
            return Ok(Expr::Int(value));
        }
        Ok(Expr::Neg(Box::new(self.unary_expr()?)))
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::LBracket {
            self.advance();
            let index = self.expr()?;
            self.expect(Tok::RBracket)?;
            base = Expr::Index(Box::new(base), Box::new(index));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                let t = self.advance();
                let value = i64::try_from(n).map_err(|_| ParseError::Syntax {
                    line: t.line,
                    column: t.column,
                    message: format!("integer literal `{n}` is too large"),
                })?;
                Ok(Expr::Int(value))
            }
            Tok::Kw(Kw::True) => {
                self.advance();
                Ok(Expr::Bool(true))
            }
            Tok::Kw(Kw::False) => {
                self.advance();
                Ok(Expr::Bool(false))
            }
            Tok::Ident(name) => {
                let t = self.advance();
                self.require_bound(&name, &t)?;
                Ok(Expr::Var(name))
            }
            Tok::Kw(Kw::Length) => {
                self.advance();
                self.expect(Tok::LParen)?;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Length(Box::new(inner)))
            }
            Tok::Kw(Kw::Append) => {
                self.advance();
                self.expect(Tok::LParen)?;
                let array = self.expr()?;
                self.expect(Tok::Comma)?;
                let item = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Append(Box::new(array), Box::new(item)))
            }
            Tok::LBracket => {
                self.advance();
                let mut items = Vec::new();
                if *self.peek() != Tok::RBracket {
                    items.push(self.expr()?);
                    while *self.peek() == Tok::Comma {
                        self.advance();
                        items.push(self.expr()?);
                    }
                }
                self.expect(Tok::RBracket)?;
                Ok(Expr::Array(items))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}
