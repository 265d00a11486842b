//! Tokenizer for model files and expressions.

use crate::error::{Error, Result, Span};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Equals,
    LParen,
    RParen,
    /// Statement separator: newline or ';'.
    Sep,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();

    macro_rules! push {
        ($tok:expr, $span:expr) => {
            tokens.push(Token {
                tok: $tok,
                span: $span,
            })
        };
    }

    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            '\n' => {
                chars.next();
                push!(Tok::Sep, span);
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            ';' => {
                chars.next();
                col += 1;
                push!(Tok::Sep, span);
            }
            '+' => {
                chars.next();
                col += 1;
                push!(Tok::Plus, span);
            }
            '-' => {
                chars.next();
                col += 1;
                push!(Tok::Minus, span);
            }
            '*' => {
                chars.next();
                col += 1;
                push!(Tok::Star, span);
            }
            '/' => {
                chars.next();
                col += 1;
                push!(Tok::Slash, span);
            }
            '^' => {
                chars.next();
                col += 1;
                push!(Tok::Caret, span);
            }
            '=' => {
                chars.next();
                col += 1;
                push!(Tok::Equals, span);
            }
            '(' => {
                chars.next();
                col += 1;
                push!(Tok::LParen, span);
            }
            ')' => {
                chars.next();
                col += 1;
                push!(Tok::RParen, span);
            }
            c if c.is_ascii_digit() => {
                let mut buf = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        buf.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if chars.peek() == Some(&'.') {
                    buf.push('.');
                    chars.next();
                    col += 1;
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            buf.push(c);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                }
                // Exponent part, only if it is actually followed by digits;
                // otherwise `2e` is Number(2) then Ident(e).
                if matches!(chars.peek(), Some('e') | Some('E')) {
                    let mut look = chars.clone();
                    look.next();
                    let mut exp = String::new();
                    if matches!(look.peek(), Some('+') | Some('-')) {
                        exp.push(*look.peek().unwrap());
                        look.next();
                    }
                    let mut digits = 0;
                    while let Some(&c) = look.peek() {
                        if c.is_ascii_digit() {
                            exp.push(c);
                            look.next();
                            digits += 1;
                        } else {
                            break;
                        }
                    }
                    if digits > 0 {
                        buf.push('e');
                        buf.push_str(&exp);
                        col += 1 + exp.len() as u32;
                        chars = look;
                    }
                }
                let value: f64 = buf.parse().map_err(|_| Error::Syntax {
                    line: span.line,
                    col: span.col,
                    message: format!("malformed number '{buf}'"),
                })?;
                push!(Tok::Number(value), span);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut buf = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        buf.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push!(Tok::Ident(buf), span);
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    col,
                    message: format!("unexpected character '{other}'"),
                });
            }
        }
    }
    Ok(tokens)
}
