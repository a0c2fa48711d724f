//! Recursive-descent parser for the formula language.
//!
//! ```text
//! formula := or
//! or      := and ("|" and)*
//! and     := unary (("&" | "\") unary)*
//! unary   := "!" unary | "(" formula ")" | atom
//! atom    := poly rel poly
//! rel     := "=" | ">=" | ">" | "<=" | "<" | "!="
//! poly    := term (("+" | "-") term)*
//! term    := factor (("*" | "/") factor)*
//! factor  := ("-" | "+") factor | primary ("^" integer)?
//! primary := number | variable | "(" poly ")"
//! ```
//!
//! Variables are `x1`, `x2`, ...; the base dimension is the highest index
//! referenced. `#` starts a comment running to the end of the line.

use std::fmt;

use num_traits::{One, Zero};

use super::{Formula, Rel};
use crate::poly::Polynomial;
use crate::rational::{self, Rational};

const MAX_EXPONENT: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownVariable(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error at {}:{}: {msg}", self.line, self.column),
            ParseErrorKind::UnknownVariable(name) => {
                write!(f, "unknown variable `{name}` at {}:{}", self.line, self.column)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    And,
    Or,
    Backslash,
    Bang,
    Rel(Rel),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(r) => format!("number `{}`", rational::to_short_string(r)),
            Tok::Var(i) => format!("variable `x{i}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Backslash => "`\\`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Rel(r) => format!("`{}`", r.symbol()),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let err = |offset: usize, kind: ParseErrorKind| {
        let (line, column) = position(src, offset);
        ParseError { line, column, kind }
    };
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let two = src.get(i..i + 2).unwrap_or("");
        let tok = match two {
            ">=" => Some(Tok::Rel(Rel::Ge)),
            "<=" => Some(Tok::Rel(Rel::Le)),
            "!=" => Some(Tok::Rel(Rel::Ne)),
            _ => None,
        };
        if let Some(t) = tok {
            toks.push((t, start));
            i += 2;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '\\' => Some(Tok::Backslash),
            '!' => Some(Tok::Bang),
            '=' => Some(Tok::Rel(Rel::Eq)),
            '>' => Some(Tok::Rel(Rel::Gt)),
            '<' => Some(Tok::Rel(Rel::Lt)),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, start));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let text = &src[start..i];
            let value = rational::parse_rational(text)
                .map_err(|_| err(start, ParseErrorKind::Syntax(format!("malformed number `{text}`"))))?;
            toks.push((Tok::Num(value), start));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < src.len() {
                let ch = src[i..].chars().next().expect("in bounds");
                if ch.is_alphanumeric() || ch == '_' {
                    i += ch.len_utf8();
                } else {
                    break;
                }
            }
            let name = &src[start..i];
            match name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                Some(idx) if idx >= 1 && !name[1..].starts_with('0') => toks.push((Tok::Var(idx), start)),
                _ => return Err(err(start, ParseErrorKind::UnknownVariable(name.to_string()))),
            }
            continue;
        }
        let ch = src[i..].chars().next().expect("in bounds");
        return Err(err(start, ParseErrorKind::Syntax(format!("unexpected character `{ch}`"))));
    }
    toks.push((Tok::End, src.len()));
    Ok(Lexed { toks })
}

#[derive(Debug, Clone)]
enum PExpr {
    Num(Rational),
    Var(usize),
    Add(Box<PExpr>, Box<PExpr>),
    Sub(Box<PExpr>, Box<PExpr>),
    Mul(Box<PExpr>, Box<PExpr>),
    /// Divisor must be a nonzero constant; the offset locates it for errors.
    Div(Box<PExpr>, Box<PExpr>, usize),
    Neg(Box<PExpr>),
    Pow(Box<PExpr>, u32),
}

impl PExpr {
    fn max_var(&self) -> usize {
        match self {
            PExpr::Num(_) => 0,
            PExpr::Var(i) => *i,
            PExpr::Add(a, b) | PExpr::Sub(a, b) | PExpr::Mul(a, b) | PExpr::Div(a, b, _) => {
                a.max_var().max(b.max_var())
            }
            PExpr::Neg(a) | PExpr::Pow(a, _) => a.max_var(),
        }
    }

    fn lower(&self, vars: &[String]) -> Result<Polynomial, (usize, String)> {
        let al = |r: Result<Polynomial, crate::poly::PolyError>| r.expect("operands share the base variable list");
        Ok(match self {
            PExpr::Num(r) => Polynomial::constant(vars.to_vec(), r.clone()),
            PExpr::Var(i) => Polynomial::var(vars.to_vec(), i - 1).expect("index below base dimension"),
            PExpr::Add(a, b) => al(a.lower(vars)?.add(&b.lower(vars)?)),
            PExpr::Sub(a, b) => al(a.lower(vars)?.sub(&b.lower(vars)?)),
            PExpr::Mul(a, b) => al(a.lower(vars)?.mul(&b.lower(vars)?)),
            PExpr::Div(a, b, at) => {
                let d = b.lower(vars)?;
                if d.degree() > 0 {
                    return Err((*at, "division by a non-constant polynomial".into()));
                }
                let c = d.constant_term();
                if c.is_zero() {
                    return Err((*at, "division by zero".into()));
                }
                a.lower(vars)?.scale(&(Rational::one() / c))
            }
            PExpr::Neg(a) => a.lower(vars)?.neg(),
            PExpr::Pow(a, e) => a.lower(vars)?.pow(*e),
        })
    }
}

#[derive(Debug, Clone)]
enum FExpr {
    Atom(PExpr, Rel, PExpr),
    And(Vec<FExpr>),
    Or(Vec<FExpr>),
    Not(Box<FExpr>),
    Diff(Box<FExpr>, Box<FExpr>),
}

impl FExpr {
    fn max_var(&self) -> usize {
        match self {
            FExpr::Atom(a, _, b) => a.max_var().max(b.max_var()),
            FExpr::And(c) | FExpr::Or(c) => c.iter().map(FExpr::max_var).max().unwrap_or(0),
            FExpr::Not(c) => c.max_var(),
            FExpr::Diff(a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn lower(&self, vars: &[String]) -> Result<Formula, (usize, String)> {
        Ok(match self {
            FExpr::Atom(a, rel, b) => {
                let lhs = a.lower(vars)?;
                let rhs = b.lower(vars)?;
                Formula::Atom { poly: lhs.sub(&rhs).expect("aligned"), rel: *rel }
            }
            FExpr::And(c) => Formula::And(c.iter().map(|f| f.lower(vars)).collect::<Result<_, _>>()?),
            FExpr::Or(c) => Formula::Or(c.iter().map(|f| f.lower(vars)).collect::<Result<_, _>>()?),
            FExpr::Not(c) => Formula::Not(Box::new(c.lower(vars)?)),
            FExpr::Diff(a, b) => Formula::Diff(Box::new(a.lower(vars)?), Box::new(b.lower(vars)?)),
        })
    }
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    /// Furthest failure seen, used when every alternative fails.
    furthest: Option<(usize, String)>,
}

type PResult<T> = Result<T, (usize, String)>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&mut self, msg: String) -> PResult<T> {
        let at = self.offset();
        let e = (at, msg);
        if self.furthest.as_ref().is_none_or(|(f, _)| at >= *f) {
            self.furthest = Some(e.clone());
        }
        Err(e)
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            let msg = format!("expected {}, found {}", want.describe(), self.peek().describe());
            self.fail(msg)
        }
    }

    fn formula(&mut self) -> PResult<FExpr> {
        let mut kids = vec![self.and()?];
        while *self.peek() == Tok::Or {
            self.bump();
            kids.push(self.and()?);
        }
        Ok(if kids.len() == 1 { kids.pop().expect("one child") } else { FExpr::Or(kids) })
    }

    fn and(&mut self) -> PResult<FExpr> {
        let mut conj = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::And => {
                    self.bump();
                    conj.push(self.unary()?);
                }
                Tok::Backslash => {
                    self.bump();
                    let rhs = self.unary()?;
                    let lhs = collapse(std::mem::take(&mut conj));
                    conj.push(FExpr::Diff(Box::new(lhs), Box::new(rhs)));
                }
                _ => break,
            }
        }
        Ok(collapse(conj))
    }

    fn unary(&mut self) -> PResult<FExpr> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(FExpr::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                let save = self.pos;
                if let Ok(a) = self.atom() {
                    return Ok(a);
                }
                self.pos = save;
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<FExpr> {
        let lhs = self.poly()?;
        let rel = match self.peek() {
            Tok::Rel(r) => *r,
            other => {
                let msg = format!("expected a relation, found {}", other.describe());
                return self.fail(msg);
            }
        };
        self.bump();
        let rhs = self.poly()?;
        Ok(FExpr::Atom(lhs, rel, rhs))
    }

    fn poly(&mut self) -> PResult<PExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = PExpr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    acc = PExpr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> PResult<PExpr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = PExpr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    let at = self.offset();
                    acc = PExpr::Div(Box::new(acc), Box::new(self.factor()?), at);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> PResult<PExpr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(PExpr::Neg(Box::new(self.factor()?)))
            }
            Tok::Plus => {
                self.bump();
                self.factor()
            }
            _ => {
                let base = self.primary()?;
                if *self.peek() != Tok::Caret {
                    return Ok(base);
                }
                self.bump();
                match self.peek().clone() {
                    Tok::Num(r)
                        if r.is_integer()
                            && r >= Rational::zero()
                            && r <= Rational::from_integer(MAX_EXPONENT.into()) =>
                    {
                        self.bump();
                        let e: u32 = r.to_integer().try_into().expect("bounded exponent");
                        Ok(PExpr::Pow(Box::new(base), e))
                    }
                    other => {
                        let msg =
                            format!("expected an integer exponent in 0..={MAX_EXPONENT}, found {}", other.describe());
                        self.fail(msg)
                    }
                }
            }
        }
    }

    fn primary(&mut self) -> PResult<PExpr> {
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(PExpr::Num(r))
            }
            Tok::Var(i) => {
                self.bump();
                Ok(PExpr::Var(i))
            }
            Tok::LParen => {
                self.bump();
                let p = self.poly()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            other => {
                let msg = format!("expected a number, variable or `(`, found {}", other.describe());
                self.fail(msg)
            }
        }
    }
}

fn collapse(mut conj: Vec<FExpr>) -> FExpr {
    if conj.len() == 1 {
        conj.pop().expect("one conjunct")
    } else {
        FExpr::And(conj)
    }
}

fn syntax_error(src: &str, (offset, msg): (usize, String)) -> ParseError {
    let (line, column) = position(src, offset);
    ParseError { line, column, kind: ParseErrorKind::Syntax(msg) }
}

fn base_vars(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("x{i}")).collect()
}

/// Parses a formula; atoms become `(lhs - rhs) rel 0` over `x1..xm`.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let lexed = lex(src)?;
    let mut p = Parser { toks: &lexed.toks, pos: 0, furthest: None };
    let tree = match p.formula() {
        Ok(t) if *p.peek() == Tok::End => t,
        Ok(_) => {
            let msg = format!("unexpected {}", p.peek().describe());
            let at = p.offset();
            let furthest = p.furthest.take().filter(|(f, _)| *f > at).unwrap_or((at, msg));
            return Err(syntax_error(src, furthest));
        }
        Err(e) => return Err(syntax_error(src, p.furthest.take().unwrap_or(e))),
    };
    let vars = base_vars(tree.max_var());
    tree.lower(&vars).map_err(|e| syntax_error(src, e))
}

/// Parses a formula over exactly `base_dim` variables; referencing a
/// variable beyond `x<base_dim>` is an error.
pub fn parse_with_dim(src: &str, base_dim: usize) -> Result<Formula, ParseError> {
    let lexed = lex(src)?;
    let mut p = Parser { toks: &lexed.toks, pos: 0, furthest: None };
    let tree = match p.formula() {
        Ok(t) if *p.peek() == Tok::End => t,
        Ok(_) => {
            let msg = format!("unexpected {}", p.peek().describe());
            return Err(syntax_error(src, (p.offset(), msg)));
        }
        Err(e) => return Err(syntax_error(src, p.furthest.take().unwrap_or(e))),
    };
    if tree.max_var() > base_dim {
        let msg = format!("variable x{} exceeds dimension {base_dim}", tree.max_var());
        return Err(syntax_error(src, (0, msg)));
    }
    tree.lower(&base_vars(base_dim)).map_err(|e| syntax_error(src, e))
}

/// Parses a polynomial expression over `x1..x<base_dim>` (or the highest
/// referenced index, when larger and `base_dim` is `None`).
pub fn parse_polynomial(src: &str, base_dim: Option<usize>) -> Result<Polynomial, ParseError> {
    let lexed = lex(src)?;
    let mut p = Parser { toks: &lexed.toks, pos: 0, furthest: None };
    let tree = match p.poly() {
        Ok(t) if *p.peek() == Tok::End => t,
        Ok(_) => {
            let msg = format!("unexpected {}", p.peek().describe());
            return Err(syntax_error(src, (p.offset(), msg)));
        }
        Err(e) => return Err(syntax_error(src, p.furthest.take().unwrap_or(e))),
    };
    let m = match base_dim {
        Some(m) if tree.max_var() > m => {
            return Err(syntax_error(src, (0, format!("variable x{} exceeds dimension {m}", tree.max_var()))))
        }
        Some(m) => m,
        None => tree.max_var(),
    };
    tree.lower(&base_vars(m)).map_err(|e| syntax_error(src, e))
}
