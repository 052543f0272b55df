//! Recursive-descent parser for the small smooth expression language.
//!
//! Grammar (highest precedence first): integer power `^`, unary minus,
//! `*` `/`, `+` `-`. Unary functions `exp`, `log`, `sin`, `cos` with call
//! syntax, variables `x1..xN`, decimal constants.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize), // 0-based
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    /// Largest variable index used, plus one.
    pub fn min_vars(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.min_vars().max(b.min_vars())
            }
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Sin(a) | Expr::Cos(a) => {
                a.min_vars()
            }
            Expr::Pow(a, _) => a.min_vars(),
        }
    }

    /// True when the expression contains `/` or `log`, i.e. is only smooth
    /// on its natural domain.
    pub fn has_restricted_domain(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Div(_, _) | Expr::Log(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.has_restricted_domain() || b.has_restricted_domain()
            }
            Expr::Neg(a) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.has_restricted_domain(),
            Expr::Pow(a, k) => a.has_restricted_domain() || *k < 0,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", pretty(self, 0))
    }
}

/// Pretty-print with minimal parentheses; `parse(pretty(e))` reproduces `e`
/// structurally on the canonical-form corpus.
fn pretty(e: &Expr, parent_prec: u8) -> String {
    let (s, prec) = match e {
        Expr::Const(v) => (format!("{v}"), 4),
        Expr::Var(i) => (format!("x{}", i + 1), 4),
        Expr::Add(a, b) => (format!("{} + {}", pretty(a, 1), pretty(b, 1)), 1),
        Expr::Sub(a, b) => (format!("{} - {}", pretty(a, 1), pretty(b, 2)), 1),
        Expr::Mul(a, b) => (format!("{}*{}", pretty(a, 2), pretty(b, 2)), 2),
        Expr::Div(a, b) => (format!("{}/{}", pretty(a, 2), pretty(b, 3)), 2),
        Expr::Neg(a) => (format!("-{}", pretty(a, 3)), 2),
        Expr::Pow(a, k) => {
            if *k < 0 {
                (format!("{}^({})", pretty(a, 4), k), 3)
            } else {
                (format!("{}^{}", pretty(a, 4), k), 3)
            }
        }
        Expr::Exp(a) => (format!("exp({})", pretty(a, 0)), 4),
        Expr::Log(a) => (format!("log({})", pretty(a, 0)), 4),
        Expr::Sin(a) => (format!("sin({})", pretty(a, 0)), 4),
        Expr::Cos(a) => (format!("cos({})", pretty(a, 0)), 4),
    };
    if prec < parent_prec {
        format!("({s})")
    } else {
        s
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("end of input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn err(&self, expected: &str) -> Error {
        Error::SyntaxError {
            position: self.pos,
            expected: expected.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.integer()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let parenthesized = self.eat(b'(');
        self.skip_ws();
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let mut v: i32 = digits
            .parse()
            .map_err(|_| self.err("integer exponent in range"))?;
        if neg {
            v = -v;
        }
        if parenthesized && !self.eat(b')') {
            return Err(self.err("closing parenthesis"));
        }
        Ok(v)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("closing parenthesis"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.err("number, variable, function or parenthesis")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text.parse().map_err(|_| Error::SyntaxError {
            position: start,
            expected: "decimal constant".into(),
        })?;
        Ok(Expr::Const(v))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(idx) = rest.parse::<usize>() {
                if idx >= 1 {
                    return Ok(Expr::Var(idx - 1));
                }
            }
        }
        let func = match name {
            "exp" => Expr::Exp as fn(Box<Expr>) -> Expr,
            "log" => Expr::Log,
            "sin" => Expr::Sin,
            "cos" => Expr::Cos,
            _ => {
                self.pos = start;
                return Err(self.err("variable x<k> or function exp/log/sin/cos"));
            }
        };
        if !self.eat(b'(') {
            return Err(self.err("opening parenthesis after function name"));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.err("closing parenthesis"));
        }
        Ok(func(Box::new(arg)))
    }
}
