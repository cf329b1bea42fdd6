//! Lexer and recursive-descent parser shared by the formula, model and
//! feature file grammars.
//!
//! Formula grammar (EBNF), loosest binding first:
//!
//! ```text
//! formula    = implies ;
//! implies    = disj [ "->" implies ] ;
//! disj       = conj { "|" conj } ;
//! conj       = until { "&" until } ;
//! until      = unary [ "U" interval unary ] ;
//! unary      = "!" unary
//!            | ( "G" | "F" ) interval [ "{" int "," int "}" ] unary
//!            | primary ;
//! primary    = "true" | "false"
//!            | comparison [ slack ]
//!            | "(" formula ")" [ slack ] ;
//! slack      = "{" int [ "*" number ] "}" ;
//! comparison = affine ( ">" | ">=" | "<" | "<=" | "==" ) affine ;
//! affine     = term { ( "+" | "-" ) term } ;
//! term       = factor { ( "*" | "/" ) factor } ;
//! factor     = number | ident | "-" factor | "(" affine ")" ;
//! interval   = "[" int "," int "]" ;
//! ```
//!
//! Products of two variables and division by a variable are rejected.

use std::fmt;

use thiserror::Error;

use crate::stl::{AffineExpr, Interval};
use crate::weakstl::{IntervalSlack, PredSlack, WeakFormula};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Num(f64),
    Ident(String),
    Temporal(char),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Gt,
    Ge,
    Lt,
    Le,
    EqEq,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Prime,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "{n}"),
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Temporal(c) => write!(f, "{c}"),
            Tok::Eof => write!(f, "end of input"),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBrack => "[",
                    Tok::RBrack => "]",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::Comma => ",",
                    Tok::Semi => ";",
                    Tok::Bang => "!",
                    Tok::Amp => "&",
                    Tok::Pipe => "|",
                    Tok::Arrow => "->",
                    Tok::Gt => ">",
                    Tok::Ge => ">=",
                    Tok::Lt => "<",
                    Tok::Le => "<=",
                    Tok::EqEq => "==",
                    Tok::Assign => "=",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Slash => "/",
                    Tok::Prime => "'",
                    _ => unreachable!(),
                };
                write!(f, "{s}")
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, m: String| ParseError { line, col, message: m };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let two = |a: char, b: char| c == a && next == Some(b);
        let tok = if c.is_ascii_digit() || (c == '.' && next.is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let v = text
                .parse::<f64>()
                .map_err(|_| err(l0, c0, format!("malformed number `{text}`")))?;
            out.push(Spanned { tok: Tok::Num(v), line: l0, col: c0 });
            continue;
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match text.as_str() {
                "G" | "F" | "U" if chars.get(i) == Some(&'[') => {
                    Tok::Temporal(text.chars().next().unwrap())
                }
                _ => Tok::Ident(text),
            };
            out.push(Spanned { tok, line: l0, col: c0 });
            continue;
        } else if two('-', '>') {
            adv(2, &mut i, &mut col);
            Tok::Arrow
        } else if two('>', '=') {
            adv(2, &mut i, &mut col);
            Tok::Ge
        } else if two('<', '=') {
            adv(2, &mut i, &mut col);
            Tok::Le
        } else if two('=', '=') {
            adv(2, &mut i, &mut col);
            Tok::EqEq
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '>' => Tok::Gt,
                '<' => Tok::Lt,
                '=' => Tok::Assign,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '\'' => Tok::Prime,
                other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
            };
            adv(1, &mut i, &mut col);
            t
        };
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

pub struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Self { toks: lex(src)?, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, col: s.col, message: message.into() }
    }

    pub fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{t}`, found `{}`", self.peek())))
        }
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`, found `{}`", self.peek())))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found `{other}`"))),
        }
    }

    /// Signed real literal.
    pub fn number(&mut self) -> Result<f64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                Ok(if neg { f64::NEG_INFINITY } else { f64::INFINITY })
            }
            other => Err(self.error(format!("expected number, found `{other}`"))),
        }
    }

    fn nonneg_int(&mut self, what: &str) -> Result<u32, ParseError> {
        if *self.peek() == Tok::Minus {
            return Err(self.error(format!("negative {what}")));
        }
        match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v <= u32::MAX as f64 => {
                self.bump();
                Ok(v as u32)
            }
            other => Err(self.error(format!("expected non-negative integer {what}, found `{other}`"))),
        }
    }

    pub fn interval(&mut self) -> Result<Interval, ParseError> {
        self.expect(Tok::LBrack)?;
        let lo = self.nonneg_int("interval bound")?;
        self.expect(Tok::Comma)?;
        let hi = self.nonneg_int("interval bound")?;
        let i = Interval::new(lo, hi)
            .ok_or_else(|| self.error(format!("malformed interval [{lo},{hi}]: lo > hi")))?;
        self.expect(Tok::RBrack)?;
        Ok(i)
    }

    // ---- affine expressions -------------------------------------------------

    pub fn affine(&mut self) -> Result<AffineExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc.add(&self.term()?);
            } else if self.eat(&Tok::Minus) {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<AffineExpr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.factor()?;
                acc = if acc.is_constant() {
                    rhs.scale(acc.constant_term())
                } else if rhs.is_constant() {
                    acc.scale(rhs.constant_term())
                } else {
                    return Err(self.error("nonlinear expression: product of variables"));
                };
            } else if self.eat(&Tok::Slash) {
                let rhs = self.factor()?;
                if !rhs.is_constant() {
                    return Err(self.error("nonlinear expression: division by a variable"));
                }
                if rhs.constant_term() == 0.0 {
                    return Err(self.error("division by zero"));
                }
                acc = acc.scale(1.0 / rhs.constant_term());
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<AffineExpr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(AffineExpr::constant(v))
            }
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(AffineExpr::var(s))
            }
            Tok::Minus => {
                self.bump();
                Ok(self.factor()?.scale(-1.0))
            }
            Tok::LParen => {
                self.bump();
                let e = self.affine()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(self.error(format!("expected expression, found `{other}`"))),
        }
    }

    // ---- formulas -----------------------------------------------------------

    pub fn formula(&mut self) -> Result<WeakFormula, ParseError> {
        let lhs = self.disj()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(WeakFormula::or(WeakFormula::not(lhs), rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<WeakFormula, ParseError> {
        let mut acc = self.conj()?;
        while self.eat(&Tok::Pipe) {
            acc = WeakFormula::or(acc, self.conj()?);
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Result<WeakFormula, ParseError> {
        let mut acc = self.until()?;
        while self.eat(&Tok::Amp) {
            acc = WeakFormula::and(acc, self.until()?);
        }
        Ok(acc)
    }

    fn until(&mut self) -> Result<WeakFormula, ParseError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Temporal('U') {
            self.bump();
            let i = self.interval()?;
            if *self.peek() == Tok::LBrace {
                return Err(self.error("weakening annotations are not allowed on Until"));
            }
            let rhs = self.unary()?;
            return Ok(WeakFormula::Until(i, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<WeakFormula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(WeakFormula::not(self.unary()?))
            }
            Tok::Temporal(op @ ('G' | 'F')) => {
                self.bump();
                let interval = self.interval()?;
                let slack = if self.eat(&Tok::LBrace) {
                    let p = self.nonneg_int("weakening bound")?;
                    self.expect(Tok::Comma)?;
                    let q = self.nonneg_int("weakening bound")?;
                    self.expect(Tok::RBrace)?;
                    Some(IntervalSlack { p, q })
                } else {
                    None
                };
                let child = self.unary()?;
                Ok(if op == 'G' {
                    WeakFormula::always(interval, slack, child)
                } else {
                    WeakFormula::eventually(interval, slack, child)
                })
            }
            Tok::Temporal(c) => Err(self.error(format!("operator `{c}` needs a left operand"))),
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<WeakFormula, ParseError> {
        if self.is_keyword("true") {
            self.bump();
            return Ok(WeakFormula::True);
        }
        if self.is_keyword("false") {
            self.bump();
            return Ok(WeakFormula::not(WeakFormula::True));
        }
        let save = self.pos;
        let atom = match self.comparison() {
            Ok(f) => f,
            Err(cmp_err) => {
                self.pos = save;
                if *self.peek() != Tok::LParen {
                    return Err(cmp_err);
                }
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                f
            }
        };
        if *self.peek() == Tok::LBrace {
            return self.attach_slack(atom);
        }
        Ok(atom)
    }

    fn attach_slack(&mut self, atom: WeakFormula) -> Result<WeakFormula, ParseError> {
        self.expect(Tok::LBrace)?;
        let bound = self.nonneg_int("weakening bound")?;
        let scale = if self.eat(&Tok::Star) {
            let s = self.number()?;
            if !(s > 0.0 && s.is_finite()) {
                return Err(self.error("slack scale must be positive"));
            }
            s
        } else {
            1.0
        };
        if *self.peek() == Tok::Comma {
            return Err(self.error("interval slack `{p,q}` is only allowed after G[a,b] or F[a,b]"));
        }
        self.expect(Tok::RBrace)?;
        match atom {
            WeakFormula::Pred { expr, slack: None } => {
                Ok(WeakFormula::Pred { expr, slack: Some(PredSlack { bound, scale }) })
            }
            WeakFormula::Pred { .. } => Err(self.error("predicate already carries a slack annotation")),
            _ => Err(self.error("slack `{p}` must follow a single comparison")),
        }
    }

    fn comparison(&mut self) -> Result<WeakFormula, ParseError> {
        let lhs = self.affine()?;
        let op = self.bump();
        let rhs = match op {
            Tok::Gt | Tok::Ge | Tok::Lt | Tok::Le | Tok::EqEq => self.affine()?,
            other => return Err(self.error(format!("expected comparison operator, found `{other}`"))),
        };
        Ok(match op {
            Tok::Gt | Tok::Ge => WeakFormula::pred(lhs.sub(&rhs)),
            Tok::Lt | Tok::Le => WeakFormula::pred(rhs.sub(&lhs)),
            _ => WeakFormula::and(WeakFormula::pred(lhs.sub(&rhs)), WeakFormula::pred(rhs.sub(&lhs))),
        })
    }

    pub fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected `{}` after end of formula", self.peek())))
        }
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(s, "true" | "false")
}

/// Parses a complete weakSTL formula.
pub fn parse_formula(text: &str) -> Result<WeakFormula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

/// Parses a complete affine expression.
pub fn parse_affine(text: &str) -> Result<AffineExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.affine()?;
    p.finish()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_line_and_column() {
        let e = parse_formula("G[0,1](x > 0)\n  & $").unwrap_err();
        assert_eq!((e.line, e.col), (2, 5));
    }

    #[test]
    fn rejects_nonlinear_terms() {
        assert!(parse_affine("x * y").unwrap_err().message.contains("nonlinear"));
        assert!(parse_affine("x / y").unwrap_err().message.contains("nonlinear"));
        assert_eq!(parse_affine("2 * x / 4").unwrap(), AffineExpr::term("x", 0.5));
    }

    #[test]
    fn parenthesised_affine_on_the_left() {
        let f = parse_formula("(a + b) * 2 > 1").unwrap();
        assert_eq!(f, WeakFormula::pred(AffineExpr::from_parts([("a", 2.0), ("b", 2.0)], -1.0)));
    }

    #[test]
    fn dangling_until_is_rejected() {
        assert!(parse_formula("U[0,1] (x > 0)").is_err());
    }
}
