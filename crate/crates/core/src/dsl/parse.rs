//! Recursive-descent parser for model files and standalone expressions.

use std::collections::HashMap;

use super::lex::{lex, Tok, Token};
use super::{BinaryOp, Constant, Expr, ExprKind, ModelFile, UnaryOp, VarRef};
use crate::error::{Error, Result, Span};

const RESERVED: &[&str] = &[
    "t", "pi", "e", "sin", "cos", "tan", "exp", "ln", "sqrt", "tanh", "abs", "param", "n", "m",
];

struct Resolver<'a> {
    n: usize,
    m: usize,
    params: &'a HashMap<String, f64>,
}

impl Resolver<'_> {
    fn resolve(&self, name: &str, span: Span) -> Result<ExprKind> {
        match name {
            "t" => return Ok(ExprKind::Var(VarRef::T)),
            "pi" => return Ok(ExprKind::Constant(Constant::Pi)),
            "e" => return Ok(ExprKind::Constant(Constant::E)),
            _ => {}
        }
        if let Some(idx) = indexed_var(name, 'w') {
            if idx == 0 || idx > self.n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} out of range for n={}",
                    self.n
                )));
            }
            return Ok(ExprKind::Var(VarRef::W(idx - 1)));
        }
        if let Some(idx) = indexed_var(name, 'z') {
            if idx == 0 || idx > self.m {
                return Err(Error::DimensionMismatch(format!(
                    "{name} out of range for m={}",
                    self.m
                )));
            }
            return Ok(ExprKind::Var(VarRef::Z(idx - 1)));
        }
        if let Some(&value) = self.params.get(name) {
            return Ok(ExprKind::Literal(value));
        }
        Err(Error::Syntax {
            line: span.line,
            col: span.col,
            message: format!("unknown identifier '{name}'"),
        })
    }
}

fn indexed_var(name: &str, prefix: char) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    resolver: Resolver<'a>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.span)
            .unwrap_or_default()
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let span = self.span();
        Error::Syntax {
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op) = match self.peek() {
            Some(Tok::Plus) => Some(BinaryOp::Add),
            Some(Tok::Minus) => Some(BinaryOp::Sub),
            _ => None,
        } {
            let span = self.span();
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::spanned(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = match self.peek() {
            Some(Tok::Star) => Some(BinaryOp::Mul),
            Some(Tok::Slash) => Some(BinaryOp::Div),
            _ => None,
        } {
            let span = self.span();
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::spanned(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Tok::Minus) = self.peek() {
            let span = self.span();
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::spanned(
                ExprKind::Unary(UnaryOp::Neg, Box::new(inner)),
                span,
            ));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            let span = self.span();
            self.bump();
            // The exponent re-enters at unary level, which makes `^`
            // right-associative and lets `2^-3` parse without parentheses.
            let exponent = self.unary()?;
            return Ok(Expr::spanned(
                ExprKind::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)),
                span,
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let span = self.span();
        match self.bump().map(|t| &t.tok) {
            Some(Tok::Number(v)) => Ok(Expr::spanned(ExprKind::Literal(*v), span)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump().map(|t| &t.tok) {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(self.err("expected ')'")),
                }
            }
            Some(Tok::Ident(name)) => {
                if let Some(op) = UnaryOp::function_name(name) {
                    match self.bump().map(|t| &t.tok) {
                        Some(Tok::LParen) => {}
                        _ => return Err(self.err(format!("expected '(' after '{name}'"))),
                    }
                    let arg = self.expr()?;
                    match self.bump().map(|t| &t.tok) {
                        Some(Tok::RParen) => {}
                        _ => return Err(self.err("expected ')'")),
                    }
                    Ok(Expr::spanned(ExprKind::Unary(op, Box::new(arg)), span))
                } else {
                    Ok(Expr::spanned(self.resolver.resolve(name, span)?, span))
                }
            }
            _ => Err(Error::Syntax {
                line: span.line,
                col: span.col,
                message: "expected expression".into(),
            }),
        }
    }
}

/// Parse a standalone expression against declared dimensions `(n, m)`.
pub fn parse_expr(text: &str, n: usize, m: usize) -> Result<Expr> {
    let tokens = lex(text)?;
    let tokens: Vec<Token> = tokens.into_iter().filter(|t| t.tok != Tok::Sep).collect();
    let params = HashMap::new();
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        resolver: Resolver {
            n,
            m,
            params: &params,
        },
    };
    let expr = parser.expr()?;
    if parser.pos != tokens.len() {
        return Err(parser.err("unexpected trailing input"));
    }
    Ok(expr)
}

/// Parse a full model file.
pub fn parse_model(text: &str) -> Result<ModelFile> {
    let tokens = lex(text)?;
    let statements = split_statements(&tokens);
    let mut iter = statements.into_iter();

    let header = iter.next().ok_or_else(|| Error::Syntax {
        line: 1,
        col: 1,
        message: "empty model file (expected header 'n=<int> m=<int>')".into(),
    })?;
    let (n, m) = parse_header(header)?;

    let mut params: HashMap<String, f64> = HashMap::new();
    let mut param_order: Vec<(String, f64)> = Vec::new();
    let mut f: Vec<Option<Expr>> = vec![None; n];
    let mut g: Vec<Option<Expr>> = vec![None; m];

    for stmt in iter {
        let first = &stmt[0];
        let name = match &first.tok {
            Tok::Ident(name) => name.clone(),
            _ => {
                return Err(Error::Syntax {
                    line: first.span.line,
                    col: first.span.col,
                    message: "expected 'param', 'f<i>' or 'g<j>' at start of statement".into(),
                })
            }
        };
        if name == "param" {
            let (pname, value) = parse_param(&stmt[1..], first.span)?;
            if RESERVED.contains(&pname.as_str())
                || indexed_var(&pname, 'w').is_some()
                || indexed_var(&pname, 'z').is_some()
            {
                return Err(Error::Syntax {
                    line: first.span.line,
                    col: first.span.col,
                    message: format!("parameter name '{pname}' is reserved"),
                });
            }
            params.insert(pname.clone(), value);
            param_order.push((pname, value));
            continue;
        }

        let (slot, which, idx) = if let Some(idx) = indexed_var(&name, 'f') {
            if idx == 0 || idx > n {
                return Err(Error::DimensionMismatch(format!(
                    "equation {name} out of range for n={n}"
                )));
            }
            (&mut f[idx - 1], "f", idx)
        } else if let Some(idx) = indexed_var(&name, 'g') {
            if idx == 0 || idx > m {
                return Err(Error::DimensionMismatch(format!(
                    "equation {name} out of range for m={m}"
                )));
            }
            (&mut g[idx - 1], "g", idx)
        } else {
            return Err(Error::Syntax {
                line: first.span.line,
                col: first.span.col,
                message: format!("expected 'param', 'f<i>' or 'g<j>', found '{name}'"),
            });
        };
        if stmt.get(1).map(|t| &t.tok) != Some(&Tok::Equals) {
            return Err(Error::Syntax {
                line: first.span.line,
                col: first.span.col,
                message: format!("expected '=' after {which}{idx}"),
            });
        }
        let mut parser = Parser {
            tokens: &stmt[2..],
            pos: 0,
            resolver: Resolver {
                n,
                m,
                params: &params,
            },
        };
        let expr = parser.expr()?;
        if parser.pos != stmt.len() - 2 {
            return Err(parser.err("unexpected trailing input"));
        }
        if slot.is_some() {
            return Err(Error::Syntax {
                line: first.span.line,
                col: first.span.col,
                message: format!("{which}{idx} defined twice"),
            });
        }
        *slot = Some(expr);
    }

    let f: Vec<Expr> = f
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            e.ok_or_else(|| Error::DimensionMismatch(format!("missing equation f{}", i + 1)))
        })
        .collect::<Result<_>>()?;
    let g: Vec<Expr> = g
        .into_iter()
        .enumerate()
        .map(|(j, e)| {
            e.ok_or_else(|| Error::DimensionMismatch(format!("missing equation g{}", j + 1)))
        })
        .collect::<Result<_>>()?;

    Ok(ModelFile {
        n,
        m,
        f,
        g,
        params: param_order,
    })
}

fn split_statements(tokens: &[Token]) -> Vec<Vec<Token>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for t in tokens {
        if t.tok == Tok::Sep {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        } else {
            current.push(t.clone());
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

fn parse_header(stmt: Vec<Token>) -> Result<(usize, usize)> {
    let fail = |span: Span| Error::Syntax {
        line: span.line,
        col: span.col,
        message: "expected header 'n=<int> m=<int>'".into(),
    };
    let span = stmt[0].span;
    if stmt.len() != 6 {
        return Err(fail(span));
    }
    let n = match (&stmt[0].tok, &stmt[1].tok, &stmt[2].tok) {
        (Tok::Ident(id), Tok::Equals, Tok::Number(v)) if id == "n" => as_count(*v, stmt[2].span)?,
        _ => return Err(fail(span)),
    };
    let m = match (&stmt[3].tok, &stmt[4].tok, &stmt[5].tok) {
        (Tok::Ident(id), Tok::Equals, Tok::Number(v)) if id == "m" => as_count(*v, stmt[5].span)?,
        _ => return Err(fail(span)),
    };
    if n == 0 {
        return Err(Error::DimensionMismatch("n must be at least 1".into()));
    }
    Ok((n, m))
}

fn as_count(v: f64, span: Span) -> Result<usize> {
    if v.fract() == 0.0 && (0.0..1e6).contains(&v) {
        Ok(v as usize)
    } else {
        Err(Error::Syntax {
            line: span.line,
            col: span.col,
            message: format!("expected a small non-negative integer, got {v}"),
        })
    }
}

fn parse_param(rest: &[Token], span: Span) -> Result<(String, f64)> {
    let fail = || Error::Syntax {
        line: span.line,
        col: span.col,
        message: "expected 'param <name> = <real>'".into(),
    };
    let name = match rest.first().map(|t| &t.tok) {
        Some(Tok::Ident(name)) => name.clone(),
        _ => return Err(fail()),
    };
    if rest.get(1).map(|t| &t.tok) != Some(&Tok::Equals) {
        return Err(fail());
    }
    let value = match rest.get(2..) {
        Some([t]) => match &t.tok {
            Tok::Number(v) => *v,
            _ => return Err(fail()),
        },
        Some([neg, t]) if neg.tok == Tok::Minus => match &t.tok {
            Tok::Number(v) => -*v,
            _ => return Err(fail()),
        },
        _ => return Err(fail()),
    };
    Ok((name, value))
}
