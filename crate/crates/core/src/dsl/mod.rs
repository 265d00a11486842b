//! Expression language for defining DAE systems in text files.
//!
//! A model file looks like:
//!
//! ```text
//! # comments run to end of line
//! n=1 m=1
//! param a = 3.0
//! f1 = -w1 + exp(-a*t)*z1
//! g1 = exp(a*t)*w1 + z1
//! ```
//!
//! The header declares the state dimension `n` and algebraic dimension `m`;
//! `param` lines bind named real constants that are substituted while
//! parsing; then one `f<i> = <expr>` per state equation and one
//! `g<j> = <expr>` per constraint. Equations are separated by newlines or
//! `;`. Expressions may reference `t`, `w1..wn`, `z1..zm`, the constants
//! `pi` and `e`, and the functions sin, cos, tan, exp, ln, sqrt, tanh, abs.
//! Operator precedence: `^` (right-associative) binds tightest, then unary
//! minus, then `*` `/`, then `+` `-`, so `-2^2` is `-(2^2)`.
//!
//! Evaluation supports dual-number forward differentiation ([`eval_dual`]),
//! which gives exact first partials for Jacobian assembly.

mod eval;
mod lex;
mod parse;

pub use eval::{eval, eval_dual, Dual, Seed};
pub use parse::{parse_expr, parse_model};

use crate::error::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Abs,
}

impl UnaryOp {
    pub(crate) fn function_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "tanh" => UnaryOp::Tanh,
            "abs" => UnaryOp::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

/// A resolved variable reference; indices are 0-based internally
/// (`W(0)` is `w1` in source).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRef {
    T,
    W(usize),
    Z(usize),
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Literal(f64),
    Constant(Constant),
    Var(VarRef),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Expression AST node. Equality ignores source spans so that structurally
/// identical trees compare equal regardless of where they were parsed from.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub(crate) fn spanned(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// True if the tree references the time variable `t`.
    pub fn uses_time(&self) -> bool {
        match &self.kind {
            ExprKind::Var(VarRef::T) => true,
            ExprKind::Var(_) | ExprKind::Literal(_) | ExprKind::Constant(_) => false,
            ExprKind::Unary(_, a) => a.uses_time(),
            ExprKind::Binary(_, a, b) => a.uses_time() || b.uses_time(),
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Literal(a), ExprKind::Literal(b)) => a == b,
            (ExprKind::Constant(a), ExprKind::Constant(b)) => a == b,
            (ExprKind::Var(a), ExprKind::Var(b)) => a == b,
            (ExprKind::Unary(op1, a1), ExprKind::Unary(op2, a2)) => op1 == op2 && a1 == a2,
            (ExprKind::Binary(op1, a1, b1), ExprKind::Binary(op2, a2, b2)) => {
                op1 == op2 && a1 == a2 && b1 == b2
            }
            _ => false,
        }
    }
}

// Binding strengths used by both the parser and the printer.
// atom(5) > pow(4) > unary minus(3) > mul/div(2) > add/sub(1)
fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
        ExprKind::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
        ExprKind::Unary(UnaryOp::Neg, _) => 3,
        ExprKind::Binary(BinaryOp::Pow, ..) => 4,
        _ => 5,
    }
}

/// Render an expression with the minimal parentheses needed so that
/// `parse_expr(pretty_print(e)) == e`.
pub fn pretty_print(e: &Expr) -> String {
    let mut out = String::new();
    print_into(e, &mut out);
    out
}

fn print_child(child: &Expr, min_prec: u8, out: &mut String) {
    if precedence(child) < min_prec {
        out.push('(');
        print_into(child, out);
        out.push(')');
    } else {
        print_into(child, out);
    }
}

fn print_into(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Literal(v) => out.push_str(&format!("{v:?}")),
        ExprKind::Constant(Constant::Pi) => out.push_str("pi"),
        ExprKind::Constant(Constant::E) => out.push('e'),
        ExprKind::Var(VarRef::T) => out.push('t'),
        ExprKind::Var(VarRef::W(i)) => out.push_str(&format!("w{}", i + 1)),
        ExprKind::Var(VarRef::Z(j)) => out.push_str(&format!("z{}", j + 1)),
        ExprKind::Unary(UnaryOp::Neg, a) => {
            out.push('-');
            print_child(a, 3, out);
        }
        ExprKind::Unary(op, a) => {
            out.push_str(op.name());
            out.push('(');
            print_into(a, out);
            out.push(')');
        }
        ExprKind::Binary(op, a, b) => {
            let (sym, prec) = match op {
                BinaryOp::Add => ("+", 1),
                BinaryOp::Sub => ("-", 1),
                BinaryOp::Mul => ("*", 2),
                BinaryOp::Div => ("/", 2),
                BinaryOp::Pow => ("^", 4),
            };
            if *op == BinaryOp::Pow {
                // Right-associative; the exponent position accepts anything
                // down to unary-minus binding.
                print_child(a, 5, out);
                out.push('^');
                print_child(b, 3, out);
            } else {
                print_child(a, prec, out);
                out.push_str(sym);
                print_child(b, prec + 1, out);
            }
        }
    }
}

/// A parsed model file: dimensions, equations and named parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub n: usize,
    pub m: usize,
    pub f: Vec<Expr>,
    pub g: Vec<Expr>,
    pub params: Vec<(String, f64)>,
}

impl ModelFile {
    /// True if any equation references `t` explicitly.
    pub fn uses_time(&self) -> bool {
        self.f.iter().chain(self.g.iter()).any(Expr::uses_time)
    }
}

#[cfg(test)]
mod tests;
