//! Composition expressions such as `(0★10)∘(0★110)`.
//!
//! Grammar (whitespace allowed between tokens):
//!
//! ```text
//! expr  = atom { ("∘" | "o") atom }
//! atom  = "(" expr ")" | lstring | "[" k ":" HEX "]"
//! lstring = { "0" | "1" | "-" | "★" | "*" }+
//! ```
//!
//! The rightmost atom is applied first. Composition is associative, so an
//! expression is stored as a flat chain and nested parentheses are flattened.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::landscape::Landscape;
use crate::lifting::compose;
use crate::rule::Rule;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Landscape(Landscape),
    Rule(Rule),
}

impl Atom {
    fn rule(&self) -> Rule {
        match self {
            Atom::Landscape(l) => l.compile(),
            Atom::Rule(r) => r.clone(),
        }
    }
}

/// A composition chain `a_1 ∘ a_2 ∘ ... ∘ a_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftExpr {
    atoms: Vec<Atom>,
}

impl LiftExpr {
    pub fn atom(l: Landscape) -> LiftExpr {
        LiftExpr {
            atoms: vec![Atom::Landscape(l)],
        }
    }

    pub fn rule(r: Rule) -> LiftExpr {
        LiftExpr {
            atoms: vec![Atom::Rule(r)],
        }
    }

    /// `left ∘ right`: `right` is applied first.
    pub fn compose(left: LiftExpr, right: LiftExpr) -> LiftExpr {
        let mut atoms = left.atoms;
        atoms.extend(right.atoms);
        LiftExpr { atoms }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn parse(text: &str) -> Result<LiftExpr> {
        let mut p = ExprParser {
            src: text,
            chars: text.char_indices().collect(),
            pos: 0,
        };
        let e = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err("expected '∘' or end of input"));
        }
        Ok(e)
    }

    /// Folds the chain from the right.
    pub fn eval(&self) -> Result<Rule> {
        let mut it = self.atoms.iter().rev();
        let mut acc = it.next().expect("chains are nonempty").rule();
        for a in it {
            acc = compose(&a.rule(), &acc)?;
        }
        Ok(acc)
    }

    pub fn to_ascii(&self) -> String {
        self.render(true)
    }

    fn render(&self, ascii: bool) -> String {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| match a {
                Atom::Landscape(l) if ascii => format!("({})", l.to_ascii()),
                Atom::Landscape(l) => format!("({l})"),
                Atom::Rule(r) => format!("[{r}]"),
            })
            .collect();
        parts.join(if ascii { "o" } else { "∘" })
    }
}

impl fmt::Display for LiftExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

impl FromStr for LiftExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<LiftExpr> {
        LiftExpr::parse(s)
    }
}

pub fn parse_expr(text: &str) -> Result<LiftExpr> {
    LiftExpr::parse(text)
}

pub fn eval_expr(e: &LiftExpr) -> Result<Rule> {
    e.eval()
}

pub fn print_expr(e: &LiftExpr, ascii: bool) -> String {
    e.render(ascii)
}

struct ExprParser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

fn is_landscape_char(c: char) -> bool {
    matches!(c, '0' | '1' | '-' | '★' | '*')
}

impl ExprParser<'_> {
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

    fn err(&self, msg: &str) -> Error {
        let msg = if self.pos >= self.chars.len() {
            format!("{msg} (at end of input)")
        } else {
            msg.to_string()
        };
        Error::Syntax {
            pos: self.offset(),
            msg,
        }
    }

    fn expr(&mut self) -> Result<LiftExpr> {
        let mut e = self.atom()?;
        while matches!(self.peek(), Some('∘' | 'o')) {
            self.pos += 1;
            e = LiftExpr::compose(e, self.atom()?);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<LiftExpr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('[') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.chars.get(self.pos), Some(&(_, c)) if c != ']') {
                    self.pos += 1;
                }
                if self.pos >= self.chars.len() {
                    return Err(self.err("expected ']'"));
                }
                let lit: String = self.chars[start..self.pos]
                    .iter()
                    .map(|&(_, c)| c)
                    .collect();
                let rule = lit.parse::<Rule>().map_err(|e| Error::Syntax {
                    pos: self.chars[start].0,
                    msg: e.to_string(),
                })?;
                self.pos += 1;
                Ok(LiftExpr::rule(rule))
            }
            Some(c) if is_landscape_char(c) => {
                let start = self.pos;
                while matches!(self.chars.get(self.pos), Some(&(_, c)) if is_landscape_char(c)) {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos]
                    .iter()
                    .map(|&(_, c)| c)
                    .collect();
                Landscape::parse(&text).map(LiftExpr::atom)
            }
            Some(_) => Err(self.err("expected '(' or a landscape")),
            None => Err(self.err("expected an atom")),
        }
    }
}
