//! Parser for factored Boolean polynomials: `x2 ^ x1 (x3 ^ 1) x4`.
//!
//! XOR is written `^`, `+` or `⊕`; AND is juxtaposition, `*` or `·`. Variables
//! are `x1`, `x_1`, ... and the constants `0` and `1` are allowed.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) enum Poly {
    Const(bool),
    Var(u32),
    Xor(Vec<Poly>),
    And(Vec<Poly>),
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<char> {
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            if c.is_whitespace() {
                self.pos += 1;
            } else {
                return Some(c);
            }
        }
        None
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |&(i, _)| i)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        }
    }

    fn sum(&mut self) -> Result<Poly> {
        let mut terms = vec![self.product()?];
        while matches!(self.peek(), Some('^' | '+' | '⊕')) {
            self.pos += 1;
            terms.push(self.product()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Poly::Xor(terms)
        })
    }

    fn product(&mut self) -> Result<Poly> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek() {
                Some('*' | '·') => {
                    self.pos += 1;
                    factors.push(self.factor()?);
                }
                Some('x' | '(' | '0' | '1') => factors.push(self.factor()?),
                _ => break,
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Poly::And(factors)
        })
    }

    fn factor(&mut self) -> Result<Poly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('0') => {
                self.pos += 1;
                Ok(Poly::Const(false))
            }
            Some('1') => {
                self.pos += 1;
                Ok(Poly::Const(true))
            }
            Some('x') => {
                self.pos += 1;
                if self.chars.get(self.pos).map(|&(_, c)| c) == Some('_') {
                    self.pos += 1;
                }
                let start = self.pos;
                while matches!(self.chars.get(self.pos), Some((_, c)) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos]
                    .iter()
                    .map(|&(_, c)| c)
                    .collect();
                match digits.parse::<u32>() {
                    Ok(i) if i >= 1 => Ok(Poly::Var(i)),
                    _ => Err(self.err("expected variable index >= 1")),
                }
            }
            Some(c) => Err(self.err(format!("unexpected {c:?}"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

impl Poly {
    pub(crate) fn parse(text: &str) -> Result<Poly> {
        let mut p = Parser {
            chars: text.char_indices().collect(),
            pos: 0,
            src: text,
        };
        let poly = p.sum()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(poly)
    }

    pub(crate) fn max_var(&self) -> u32 {
        match self {
            Poly::Const(_) => 0,
            Poly::Var(i) => *i,
            Poly::Xor(ts) | Poly::And(ts) => ts.iter().map(Poly::max_var).max().unwrap_or(0),
        }
    }

    /// Evaluates with `x_{i+1}` = bit `i` of `v`.
    pub(crate) fn eval(&self, v: u64) -> bool {
        match self {
            Poly::Const(b) => *b,
            Poly::Var(i) => v >> (i - 1) & 1 == 1,
            Poly::Xor(ts) => ts.iter().fold(false, |acc, t| acc ^ t.eval(v)),
            Poly::And(ts) => ts.iter().all(|t| t.eval(v)),
        }
    }
}
