//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := ("-" | "+") factor | atom ["^" int]
//! atom   := number | ident | "(" expr ")" | func "(" expr ")"
//! func   := sin | cos | exp | sqrt | abs
//! ident  := t | y<k> | p<k> | u<k> | s<i>_<j>
//! ```
//!
//! Indices in identifiers are 1-based (`y1` is state 0). `u<k>` is an alias
//! of `p<k>`; `s<i>_<j>` is the sensitivity of `y<i>` with respect to `p<j>`.

use thiserror::Error;

use super::{Expr, UnaryOp};
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at position {position}")]
pub struct ParseError {
    /// Byte offset into the source.
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(ParseError::new(
            p.pos,
            format!("unexpected '{}'", p.peek().unwrap_or(' ')),
        ));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected '{c}'")))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        match self.peek() {
            Some(c) => ParseError::new(self.pos, format!("{what}, found '{c}'")),
            None => ParseError::new(self.pos, format!("{what}, found end of input")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Binary(super::BinaryOp::Add, Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Binary(super::BinaryOp::Sub, Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Binary(super::BinaryOp::Mul, Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat('/') {
                lhs = Expr::Binary(super::BinaryOp::Div, Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::neg(self.factor()?));
        }
        if self.eat('+') {
            return self.factor();
        }
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            let digits = self.take_while(|c| c.is_ascii_digit());
            if digits.is_empty() {
                return Err(self.unexpected("expected a non-negative integer exponent"));
            }
            let k: u32 = digits
                .parse()
                .map_err(|_| ParseError::new(start, "exponent too large"))?;
            return Ok(Expr::PowInt(Box::new(base), k));
        }
        Ok(base)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if pred(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let ident = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_').to_string();
                let func = match ident.as_str() {
                    "sin" => Some(UnaryOp::Sin),
                    "cos" => Some(UnaryOp::Cos),
                    "exp" => Some(UnaryOp::Exp),
                    "sqrt" => Some(UnaryOp::Sqrt),
                    "abs" => Some(UnaryOp::Abs),
                    _ => None,
                };
                if let Some(op) = func {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Unary(op, Box::new(arg)));
                }
                variable(&ident).ok_or_else(|| ParseError::new(start, format!("unknown identifier '{ident}'")))
            }
            _ => Err(self.unexpected("expected a number, variable, function or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        self.take_while(|c| c.is_ascii_digit());
        if self.peek() == Some('.') {
            self.pos += 1;
            self.take_while(|c| c.is_ascii_digit());
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.take_while(|c| c.is_ascii_digit()).is_empty() {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::new(start, format!("malformed number '{text}'")))?;
        if !value.is_finite() {
            return Err(ParseError::new(start, format!("number '{text}' out of range")));
        }
        Ok(Expr::Const(literal_enclosure(text, value)))
    }
}

fn index(digits: &str) -> Option<usize> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    k.checked_sub(1)
}

fn variable(ident: &str) -> Option<Expr> {
    if ident == "t" {
        return Some(Expr::time());
    }
    let (head, rest) = ident.split_at(1);
    match head {
        "y" => index(rest).map(Expr::state),
        "p" | "u" => index(rest).map(Expr::param),
        "s" => {
            let (i, j) = rest.split_once('_')?;
            Some(Expr::sens(index(i)?, index(j)?))
        }
        _ => None,
    }
}

/// Enclosure of the real number written as `text`: thin when the decimal is
/// exactly representable, otherwise one ulp around the nearest double.
fn literal_enclosure(text: &str, value: f64) -> Interval {
    if decimal_is_exact(text) == Some(true) {
        Interval::point(value)
    } else {
        Interval::around(value)
    }
}

fn decimal_is_exact(text: &str) -> Option<bool> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let mut scale = exp - frac_part.len() as i32;
    let mut digits = digits.to_string();
    while digits.ends_with('0') {
        digits.pop();
        scale += 1;
    }
    if digits.is_empty() {
        return Some(true);
    }
    if digits.len() > 38 {
        return None;
    }
    let mut m: u128 = digits.parse().ok()?;
    const LIMIT: u128 = 1 << 53;
    if scale >= 0 {
        for _ in 0..scale {
            m = m.checked_mul(10)?;
        }
        // Integers beyond 2^53 may still be exact, but only if trailing bits vanish.
        let tz = m.trailing_zeros();
        return Some((m >> tz) < LIMIT && m < (1u128 << 127));
    }
    let k = (-scale) as u32;
    if k > 55 {
        return Some(false);
    }
    let five = 5u128.checked_pow(k)?;
    if !m.is_multiple_of(five) {
        return Some(false);
    }
    let q = m / five;
    let tz = q.trailing_zeros();
    Some((q >> tz) < LIMIT)
}
