//! Text form of expression trees.
//!
//! ```text
//! tree := "(pair" expr expr ")"
//! expr := terminal | "(" op expr... ")"
//! ```
//!
//! Terminals are terminal-set labels, generic `p<i>` references, or decimal
//! constants. Constants are written with 17 significant digits so every
//! `f64` survives a round trip.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Expr, ExprTree, Op, PAIR_SYMBOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("wrong arity for {op}: expected {expected}, found {found}")]
    WrongArity { op: String, expected: usize, found: usize },
    #[error("missing pair root")]
    MissingPairRoot,
    #[error("pair is only allowed at the root")]
    NestedPair,
    #[error("operator {0} used as a terminal")]
    OperatorAsTerminal(String),
    #[error("non-finite constant {0}")]
    NonFiniteConstant(String),
    #[error("parameter {0} out of range")]
    ParamOutOfRange(String),
    #[error("tree depth exceeds limit {0}")]
    TooDeep(usize),
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("unexpected )")]
    UnexpectedClose,
    #[error("trailing input after tree")]
    TrailingInput,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, Token::Atom(&text[s..i])));
            }
            match ch {
                '(' => out.push((i, Token::Open)),
                ')' => out.push((i, Token::Close)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, Token::Atom(&text[s..])));
    }
    out
}

struct Parser<'a, 'l> {
    tokens: Vec<(usize, Token<'a>)>,
    at: usize,
    end: usize,
    labels: &'l [&'l str],
    d_max: usize,
}

impl<'a> Parser<'a, '_> {
    fn err(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { pos, kind }
    }

    fn next(&mut self) -> Result<(usize, Token<'a>), ParseError> {
        let tok = self
            .tokens
            .get(self.at)
            .copied()
            .ok_or_else(|| self.err(self.end, ParseErrorKind::UnexpectedEof))?;
        self.at += 1;
        Ok(tok)
    }

    fn peek(&self) -> Option<(usize, Token<'a>)> {
        self.tokens.get(self.at).copied()
    }

    fn tree(&mut self) -> Result<ExprTree, ParseError> {
        let (pos, tok) = self.next()?;
        if tok != Token::Open {
            return Err(self.err(pos, ParseErrorKind::MissingPairRoot));
        }
        let (pos, head) = self.next()?;
        if head != Token::Atom(PAIR_SYMBOL) {
            return Err(self.err(pos, ParseErrorKind::MissingPairRoot));
        }
        let x = self.expr(1)?;
        let y = self.expr(1)?;
        match self.next()? {
            (_, Token::Close) => {}
            (pos, _) => {
                return Err(self.err(
                    pos,
                    ParseErrorKind::WrongArity {
                        op: PAIR_SYMBOL.into(),
                        expected: 2,
                        found: 3,
                    },
                ))
            }
        }
        if let Some((pos, _)) = self.peek() {
            return Err(self.err(pos, ParseErrorKind::TrailingInput));
        }
        Ok(ExprTree::new(x, y))
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let (pos, tok) = self.next()?;
        if depth > self.d_max {
            return Err(self.err(pos, ParseErrorKind::TooDeep(self.d_max)));
        }
        match tok {
            Token::Close => Err(self.err(pos, ParseErrorKind::UnexpectedClose)),
            Token::Atom(a) => self.terminal(pos, a),
            Token::Open => {
                let (head_pos, head) = self.next()?;
                let name = match head {
                    Token::Atom(a) => a,
                    Token::Open => return Err(self.err(head_pos, ParseErrorKind::UnknownSymbol("(".into()))),
                    Token::Close => return Err(self.err(head_pos, ParseErrorKind::UnexpectedClose)),
                };
                if name == PAIR_SYMBOL {
                    return Err(self.err(head_pos, ParseErrorKind::NestedPair));
                }
                let op = Op::from_symbol(name)
                    .ok_or_else(|| self.err(head_pos, ParseErrorKind::UnknownSymbol(name.into())))?;
                let mut args = Vec::with_capacity(op.arity());
                loop {
                    match self.peek() {
                        Some((_, Token::Close)) => {
                            self.at += 1;
                            break;
                        }
                        Some(_) => args.push(self.expr(depth + 1)?),
                        None => return Err(self.err(self.end, ParseErrorKind::UnexpectedEof)),
                    }
                }
                if args.len() != op.arity() {
                    return Err(self.err(
                        pos,
                        ParseErrorKind::WrongArity {
                            op: name.into(),
                            expected: op.arity(),
                            found: args.len(),
                        },
                    ));
                }
                Ok(Expr::Apply(op, args))
            }
        }
    }

    fn terminal(&self, pos: usize, atom: &str) -> Result<Expr, ParseError> {
        if let Some(i) = self.labels.iter().position(|l| *l == atom) {
            return Ok(Expr::Param(i));
        }
        if let Some(digits) = atom.strip_prefix('p') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return match digits.parse::<usize>() {
                    Ok(i) if i < self.labels.len() => Ok(Expr::Param(i)),
                    _ => Err(self.err(pos, ParseErrorKind::ParamOutOfRange(atom.into()))),
                };
            }
        }
        if Op::from_symbol(atom).is_some() || atom == PAIR_SYMBOL {
            return Err(self.err(pos, ParseErrorKind::OperatorAsTerminal(atom.into())));
        }
        let starts_numeric = atom
            .trim_start_matches(['-', '+'])
            .starts_with(|c: char| c.is_ascii_digit() || c == '.');
        if starts_numeric {
            if let Ok(v) = atom.parse::<f64>() {
                return if v.is_finite() {
                    Ok(Expr::Const(v))
                } else {
                    Err(self.err(pos, ParseErrorKind::NonFiniteConstant(atom.into())))
                };
            }
        }
        Err(self.err(pos, ParseErrorKind::UnknownSymbol(atom.into())))
    }
}

/// Parses a tree. `labels` names the terminal set (its length is the
/// arity); `p<i>` is accepted for any `i < labels.len()`. Nodes deeper than
/// `d_max` are rejected.
pub fn parse_tree(text: &str, labels: &[&str], d_max: usize) -> Result<ExprTree, ParseError> {
    let mut p = Parser {
        tokens: tokenize(text),
        at: 0,
        end: text.len(),
        labels,
        d_max,
    };
    p.tree()
}

fn write_expr(out: &mut String, e: &Expr, labels: &[&str]) {
    match e {
        Expr::Param(i) => match labels.get(*i) {
            Some(l) => out.push_str(l),
            None => {
                let _ = write!(out, "p{i}");
            }
        },
        Expr::Const(c) => {
            let _ = write!(out, "{c:.16e}");
        }
        Expr::Apply(op, args) => {
            out.push('(');
            out.push_str(op.symbol());
            for a in args {
                out.push(' ');
                write_expr(out, a, labels);
            }
            out.push(')');
        }
    }
}

pub(super) fn serialize(tree: &ExprTree, labels: &[&str]) -> String {
    let mut out = String::from("(pair");
    for b in &tree.branches {
        out.push(' ');
        write_expr(&mut out, b, labels);
    }
    out.push(')');
    out
}
