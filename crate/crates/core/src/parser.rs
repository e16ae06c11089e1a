//! Recursive-descent parser for laws.
//!
//! Precedence, tightest first: `!` and the temporal unaries `X N F G`;
//! `U` and `R` (right-associative); `&`; `|`; `->` (right-associative);
//! `<->` (left-associative). A quantifier body extends as far right as
//! possible. Parsing is always against a [`Signature`]: every name must be
//! declared, every node must belong to the signature's layer, and the
//! result must be a sentence.

use std::fmt;

use thiserror::Error;

use crate::formula::{CmpOp, Formula, FormulaKind, SourceSpan, Term};
use crate::signature::{Layer, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    MalformedToken,
    UnexpectedToken,
    UnknownSymbol,
    LayerMismatch,
    ArityMisuse,
    SortMismatch,
    UnboundVariable,
    LiteralOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Cmp(CmpOp),
    Forall,
    Exists,
    True,
    False,
    Same,
    Except,
    Next,
    WeakNext,
    Eventually,
    Globally,
    Until,
    Release,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Bar => write!(f, "`|`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::DArrow => write!(f, "`<->`"),
            Tok::Cmp(op) => write!(f, "`{}`", op.symbol()),
            Tok::Forall => write!(f, "`forall`"),
            Tok::Exists => write!(f, "`exists`"),
            Tok::True => write!(f, "`true`"),
            Tok::False => write!(f, "`false`"),
            Tok::Same => write!(f, "`same`"),
            Tok::Except => write!(f, "`except`"),
            Tok::Next => write!(f, "`X`"),
            Tok::WeakNext => write!(f, "`N`"),
            Tok::Eventually => write!(f, "`F`"),
            Tok::Globally => write!(f, "`G`"),
            Tok::Until => write!(f, "`U`"),
            Tok::Release => write!(f, "`R`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn span_from(&self, begin: usize, line: usize, column: usize) -> SourceSpan {
        SourceSpan {
            begin,
            end: self.pos,
            line,
            column,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (begin, line, column) = (self.pos, self.line, self.col);
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, self.span_from(begin, line, column)));
                return Ok(out);
            };
            let malformed = |lx: &Self, what: &str| ParseError {
                kind: ParseErrorKind::MalformedToken,
                span: lx.span_from(begin, line, column),
                message: what.to_string(),
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '&' => Tok::Amp,
                '|' => Tok::Bar,
                '=' => Tok::Cmp(CmpOp::Eq),
                '!' if self.peek() == Some('=') => {
                    self.bump();
                    Tok::Cmp(CmpOp::Ne)
                }
                '!' => Tok::Bang,
                '>' if self.peek() == Some('=') => {
                    self.bump();
                    Tok::Cmp(CmpOp::Ge)
                }
                '>' => Tok::Cmp(CmpOp::Gt),
                '<' if self.peek() == Some('-') => {
                    self.bump();
                    if self.peek() == Some('>') {
                        self.bump();
                        Tok::DArrow
                    } else {
                        return Err(malformed(&self, "malformed token `<-`, expected `<->`"));
                    }
                }
                '<' if self.peek() == Some('=') => {
                    self.bump();
                    Tok::Cmp(CmpOp::Le)
                }
                '<' => Tok::Cmp(CmpOp::Lt),
                '-' if self.peek() == Some('>') => {
                    self.bump();
                    Tok::Arrow
                }
                '-' if self.peek().is_some_and(|d| d.is_ascii_digit()) => self.integer(begin, line, column)?,
                c if c.is_ascii_digit() => self.integer(begin, line, column)?,
                c if c.is_ascii_alphabetic() => {
                    while self.peek().is_some_and(|d| d.is_ascii_alphanumeric() || d == '_') {
                        self.bump();
                    }
                    keyword_or_ident(&self.src[begin..self.pos])
                }
                other => return Err(malformed(&self, &format!("unexpected character {other:?}"))),
            };
            out.push((tok, self.span_from(begin, line, column)));
        }
    }

    fn integer(&mut self, begin: usize, line: usize, column: usize) -> Result<Tok, ParseError> {
        while self.peek().is_some_and(|d| d.is_ascii_digit()) {
            self.bump();
        }
        if self.peek().is_some_and(|d| d.is_ascii_alphabetic() || d == '_') {
            while self.peek().is_some_and(|d| d.is_ascii_alphanumeric() || d == '_') {
                self.bump();
            }
            return Err(ParseError {
                kind: ParseErrorKind::MalformedToken,
                span: self.span_from(begin, line, column),
                message: format!("malformed token {:?}", &self.src[begin..self.pos]),
            });
        }
        let text = &self.src[begin..self.pos];
        text.parse::<i64>().map(Tok::Int).map_err(|_| ParseError {
            kind: ParseErrorKind::MalformedToken,
            span: self.span_from(begin, line, column),
            message: format!("integer literal {text} does not fit in 64 bits"),
        })
    }
}

fn keyword_or_ident(word: &str) -> Tok {
    match word {
        "forall" => Tok::Forall,
        "exists" => Tok::Exists,
        "true" => Tok::True,
        "false" => Tok::False,
        "same" => Tok::Same,
        "except" => Tok::Except,
        "X" => Tok::Next,
        "N" => Tok::WeakNext,
        "F" => Tok::Eventually,
        "G" => Tok::Globally,
        "U" => Tok::Until,
        "R" => Tok::Release,
        _ => Tok::Ident(word.to_string()),
    }
}

struct Parser<'s> {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    sig: &'s Signature,
    scope: Vec<String>,
}

type PResult<T> = Result<T, ParseError>;

impl<'s> Parser<'s> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].1
    }

    fn advance(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            kind,
            span,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(
            ParseErrorKind::UnexpectedToken,
            self.span(),
            format!("expected {wanted}, found {}", self.peek()),
        )
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> PResult<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            self.unexpected(wanted)
        }
    }

    fn require_layer(&self, layer: Layer, span: SourceSpan, what: &str) -> PResult<()> {
        if self.sig.kind() == layer {
            Ok(())
        } else {
            self.err(
                ParseErrorKind::LayerMismatch,
                span,
                format!("{what} belongs to the {layer} layer but the signature is {}", self.sig.kind()),
            )
        }
    }

    fn node(kind: FormulaKind, begin: SourceSpan, end: SourceSpan) -> Formula {
        Formula::new(kind, begin.cover(end))
    }

    fn formula(&mut self) -> PResult<Formula> {
        self.iff()
    }

    fn iff(&mut self) -> PResult<Formula> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::DArrow {
            self.advance();
            let rhs = self.implication()?;
            let (b, e) = (lhs.span.unwrap(), rhs.span.unwrap());
            lhs = Self::node(FormulaKind::Iff(Box::new(lhs), Box::new(rhs)), b, e);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.advance();
            let rhs = self.implication()?;
            let (b, e) = (lhs.span.unwrap(), rhs.span.unwrap());
            return Ok(Self::node(FormulaKind::Implies(Box::new(lhs), Box::new(rhs)), b, e));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.advance();
            let rhs = self.conjunction()?;
            let (b, e) = (lhs.span.unwrap(), rhs.span.unwrap());
            lhs = Self::node(FormulaKind::Or(Box::new(lhs), Box::new(rhs)), b, e);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.binary_temporal()?;
        while *self.peek() == Tok::Amp {
            self.advance();
            let rhs = self.binary_temporal()?;
            let (b, e) = (lhs.span.unwrap(), rhs.span.unwrap());
            lhs = Self::node(FormulaKind::And(Box::new(lhs), Box::new(rhs)), b, e);
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> PResult<Formula> {
        let lhs = self.unary()?;
        let is_until = match self.peek() {
            Tok::Until => true,
            Tok::Release => false,
            _ => return Ok(lhs),
        };
        let op_span = self.advance().1;
        self.require_layer(Layer::Temporal, op_span, if is_until { "`U`" } else { "`R`" })?;
        let rhs = self.binary_temporal()?;
        let (b, e) = (lhs.span.unwrap(), rhs.span.unwrap());
        let kind = if is_until {
            FormulaKind::Until(Box::new(lhs), Box::new(rhs))
        } else {
            FormulaKind::Release(Box::new(lhs), Box::new(rhs))
        };
        Ok(Self::node(kind, b, e))
    }

    fn unary(&mut self) -> PResult<Formula> {
        let start = self.span();
        let wrap: fn(Box<Formula>) -> FormulaKind = match self.peek() {
            Tok::Bang => FormulaKind::Not,
            Tok::Next => FormulaKind::Next,
            Tok::WeakNext => FormulaKind::WeakNext,
            Tok::Eventually => FormulaKind::Eventually,
            Tok::Globally => FormulaKind::Globally,
            Tok::Forall | Tok::Exists => return self.quantifier(),
            _ => return self.primary(),
        };
        let (tok, _) = self.advance();
        if tok != Tok::Bang {
            self.require_layer(Layer::Temporal, start, &tok.to_string())?;
        }
        let body = self.unary()?;
        let end = body.span.unwrap();
        Ok(Self::node(wrap(Box::new(body)), start, end))
    }

    fn quantifier(&mut self) -> PResult<Formula> {
        let (tok, start) = self.advance();
        self.require_layer(Layer::Relational, start, "a quantifier")?;
        let var = match self.peek().clone() {
            Tok::Ident(v) => {
                self.advance();
                v
            }
            _ => return self.unexpected("a variable name"),
        };
        self.expect(Tok::Dot, "`.` after the quantified variable")?;
        self.scope.push(var.clone());
        let body = self.formula();
        self.scope.pop();
        let body = body?;
        let end = body.span.unwrap();
        let kind = if tok == Tok::Forall {
            FormulaKind::Forall {
                var,
                body: Box::new(body),
            }
        } else {
            FormulaKind::Exists {
                var,
                body: Box::new(body),
            }
        };
        Ok(Self::node(kind, start, end))
    }

    fn primary(&mut self) -> PResult<Formula> {
        let start = self.span();
        match self.peek().clone() {
            Tok::True => {
                self.advance();
                Ok(Formula::new(FormulaKind::True, start))
            }
            Tok::False => {
                self.advance();
                Ok(Formula::new(FormulaKind::False, start))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.formula()?;
                let end = self.expect(Tok::RParen, "`)`")?;
                Ok(Formula {
                    kind: inner.kind,
                    span: Some(start.cover(end)),
                })
            }
            Tok::Same => self.same_except(),
            Tok::Ident(name) if self.sig.kind() == Layer::Temporal => {
                self.advance();
                if self.sig.has_atom(&name) {
                    if *self.peek() == Tok::LParen {
                        return self.err(
                            ParseErrorKind::ArityMisuse,
                            self.span(),
                            format!("atom {name} takes no arguments"),
                        );
                    }
                    Ok(Formula::new(FormulaKind::Atom(name), start))
                } else {
                    self.err(ParseErrorKind::UnknownSymbol, start, format!("unknown atom {name}"))
                }
            }
            Tok::Ident(_) | Tok::Int(_) => self.relational_atom(),
            _ => self.unexpected("a formula"),
        }
    }

    fn same_except(&mut self) -> PResult<Formula> {
        let start = self.advance().1;
        self.require_layer(Layer::Relational, start, "`same`")?;
        self.expect(Tok::LParen, "`(` after `same`")?;
        let left = self.bound_variable()?;
        self.expect(Tok::Comma, "`,`")?;
        let right = self.bound_variable()?;
        let mut end = self.expect(Tok::RParen, "`)`")?;
        let mut excluded = Vec::new();
        if *self.peek() == Tok::Except {
            self.advance();
            loop {
                let span = self.span();
                match self.peek().clone() {
                    Tok::Ident(f) if self.sig.function_range(&f).is_some() => {
                        self.advance();
                        excluded.push(f);
                        end = span;
                    }
                    Tok::Ident(f) => {
                        return self.err(
                            ParseErrorKind::UnknownSymbol,
                            span,
                            format!("{f} is not a declared function"),
                        )
                    }
                    _ => return self.unexpected("a function name"),
                }
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.advance();
            }
        }
        Ok(Self::node(
            FormulaKind::SameExcept {
                left,
                right,
                excluded,
            },
            start,
            end,
        ))
    }

    fn bound_variable(&mut self) -> PResult<String> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(v) => {
                self.advance();
                if self.scope.contains(&v) {
                    Ok(v)
                } else {
                    self.err(ParseErrorKind::UnboundVariable, span, format!("variable {v} is not bound"))
                }
            }
            _ => self.unexpected("a variable"),
        }
    }

    /// `P(x)`, or `term op term` where terms are variables, literals or `f(x)`.
    fn relational_atom(&mut self) -> PResult<Formula> {
        let start = self.span();
        if let (Tok::Ident(name), Tok::LParen) = (self.peek().clone(), self.peek_at(1).clone()) {
            if self.sig.has_predicate(&name) {
                self.advance();
                let var = self.application_argument(&name)?;
                let end = self.prev_span();
                if let Tok::Cmp(_) = self.peek() {
                    return self.err(
                        ParseErrorKind::SortMismatch,
                        start.cover(end),
                        format!("predicate {name} cannot be compared; it is not a function"),
                    );
                }
                return Ok(Self::node(FormulaKind::Pred { name, var }, start, end));
            }
        }
        let (lhs, lhs_span) = self.term()?;
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => {
                return match &lhs {
                    Term::Var(v) if self.sig.has_predicate(v) => self.err(
                        ParseErrorKind::ArityMisuse,
                        lhs_span,
                        format!("predicate {v} expects one argument"),
                    ),
                    _ => self.unexpected("a comparison operator"),
                }
            }
        };
        self.advance();
        let (rhs, rhs_span) = self.term()?;
        match (lhs.is_individual(), rhs.is_individual()) {
            (true, true) if !matches!(op, CmpOp::Eq | CmpOp::Ne) => {
                return self.err(
                    ParseErrorKind::SortMismatch,
                    lhs_span.cover(rhs_span),
                    format!("individuals can only be compared with `=` or `!=`, not `{}`", op.symbol()),
                )
            }
            (true, false) | (false, true) => {
                return self.err(
                    ParseErrorKind::SortMismatch,
                    lhs_span.cover(rhs_span),
                    "cannot compare an individual with an integer",
                )
            }
            _ => {}
        }
        Ok(Self::node(FormulaKind::Cmp { lhs, op, rhs }, start, rhs_span))
    }

    fn application_argument(&mut self, name: &str) -> PResult<String> {
        self.expect(Tok::LParen, "`(`")?;
        let var = self.bound_variable()?;
        if *self.peek() == Tok::Comma {
            return self.err(
                ParseErrorKind::ArityMisuse,
                self.span(),
                format!("{name} is unary and takes exactly one argument"),
            );
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(var)
    }

    fn term(&mut self) -> PResult<(Term, SourceSpan)> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                if !self.sig.literal_admissible(v) {
                    return self.err(
                        ParseErrorKind::LiteralOutOfRange,
                        start,
                        format!("literal {v} lies outside every declared function range (widened by one)"),
                    );
                }
                Ok((Term::Int(v), start))
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen => {
                if self.sig.function_range(&name).is_none() {
                    let kind = if self.sig.has_predicate(&name) {
                        ParseErrorKind::SortMismatch
                    } else {
                        ParseErrorKind::UnknownSymbol
                    };
                    let msg = if kind == ParseErrorKind::SortMismatch {
                        format!("predicate {name} used where an integer term is expected")
                    } else {
                        format!("unknown symbol {name}")
                    };
                    return self.err(kind, start, msg);
                }
                self.advance();
                let var = self.application_argument(&name)?;
                Ok((Term::App { func: name, var }, start.cover(self.prev_span())))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.scope.contains(&name) {
                    return Ok((Term::Var(name), start));
                }
                if self.sig.function_range(&name).is_some() {
                    return self.err(
                        ParseErrorKind::ArityMisuse,
                        start,
                        format!("function {name} expects one argument"),
                    );
                }
                if self.sig.has_predicate(&name) {
                    return self.err(
                        ParseErrorKind::ArityMisuse,
                        start,
                        format!("predicate {name} expects one argument"),
                    );
                }
                self.err(ParseErrorKind::UnboundVariable, start, format!("variable {name} is not bound"))
            }
            _ => self.unexpected("a term"),
        }
    }
}

fn tokenize(source: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    Lexer {
        src: source,
        pos: 0,
        line: 1,
        col: 1,
    }
    .tokenize()
}

/// Parses exactly one sentence of `sig`'s layer.
pub fn parse(source: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        sig,
        scope: Vec::new(),
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.unexpected("end of input");
    }
    Ok(f)
}
