use std::fmt::Write;

use super::ast::{Expr, Program, Stmt, PREC_CMP, PREC_NOT, PREC_POSTFIX, PREC_UNARY};

const INDENT: &str = "  ";

/// Canonical form: one statement per line, two-space indentation, minimal
/// parentheses.
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    write_block(&mut out, &program.body, 0);
    out
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for stmt in stmts {
        write_stmt(out, stmt, depth);
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    match stmt {
        Stmt::Set { name, value } => {
            let _ = writeln!(out, "{pad}set {name} to {}", expr_to_string(value));
        }
        Stmt::SetIndex { name, index, value } => {
            let _ = writeln!(
                out,
                "{pad}set {name}[{}] to {}",
                expr_to_string(index),
                expr_to_string(value)
            );
        }
        Stmt::Swap { name, i, j } => {
            let _ = writeln!(
                out,
                "{pad}swap({name}, {}, {})",
                expr_to_string(i),
                expr_to_string(j)
            );
        }
        Stmt::For {
            var,
            start,
            stop,
            body,
        } => {
            let _ = writeln!(
                out,
                "{pad}for {var} from {} to {} do",
                expr_to_string(start),
                expr_to_string(stop)
            );
            write_block(out, body, depth + 1);
            let _ = writeln!(out, "{pad}end");
        }
        Stmt::While { cond, body } => {
            let _ = writeln!(out, "{pad}while {} do", expr_to_string(cond));
            write_block(out, body, depth + 1);
            let _ = writeln!(out, "{pad}end");
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = writeln!(out, "{pad}if {} then", expr_to_string(cond));
            write_block(out, then_branch, depth + 1);
            if let Some(branch) = else_branch {
                let _ = writeln!(out, "{pad}else");
                write_block(out, branch, depth + 1);
            }
            let _ = writeln!(out, "{pad}end");
        }
        Stmt::Return(e) => {
            let _ = writeln!(out, "{pad}return {}", expr_to_string(e));
        }
    }
}

pub fn expr_to_string(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr);
    out
}

/// Writes `expr`, parenthesized when its precedence is below `min`.
fn write_operand(out: &mut String, expr: &Expr, min: u8) {
    if expr.precedence() < min {
        out.push('(');
        write_expr(out, expr);
        out.push(')');
    } else {
        write_expr(out, expr);
    }
}

fn write_expr(out: &mut String, expr: &Expr) {
    match expr {
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Expr::Var(name) => out.push_str(name),
        Expr::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item);
            }
            out.push(']');
        }
        Expr::Length(inner) => {
            out.push_str("length(");
            write_expr(out, inner);
            out.push(')');
        }
        Expr::Append(array, item) => {
            out.push_str("append(");
            write_expr(out, array);
            out.push_str(", ");
            write_expr(out, item);
            out.push(')');
        }
        Expr::Index(base, index) => {
            write_operand(out, base, PREC_POSTFIX);
            out.push('[');
            write_expr(out, index);
            out.push(']');
        }
        Expr::Neg(inner) => {
            out.push('-');
            let mut operand = String::new();
            write_operand(&mut operand, inner, PREC_UNARY);
            // `-` directly before a digit would re-read as a negative literal.
            if operand.starts_with(|c: char| c.is_ascii_digit()) {
                out.push('(');
                out.push_str(&operand);
                out.push(')');
            } else {
                out.push_str(&operand);
            }
        }
        Expr::Not(inner) => {
            out.push_str("not ");
            write_operand(out, inner, PREC_NOT);
        }
        Expr::Binary(op, lhs, rhs) => {
            let prec = op.precedence();
            // Comparisons do not chain; everything else is left-associative.
            let lhs_min = if prec == PREC_CMP { prec + 1 } else { prec };
            write_operand(out, lhs, lhs_min);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, rhs, prec + 1);
        }
    }
}
