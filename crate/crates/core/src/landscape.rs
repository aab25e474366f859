//! Landscapes: strings over `{0, 1, -, ★}` describing when the starred cell flips.
//!
//! Position `i` relative to the star holds `ε_i`. A single landscape compiles
//! to the primitive landscape function `x_s ⊕ ∏ (x_{s+i} ⊕ ε_i ⊕ 1)` where the
//! product runs over the fixed (`0`/`1`) symbols.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rule::{tabulate, Rule, MAX_ARITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Zero,
    One,
    Any,
    Star,
}

impl Symbol {
    fn unicode(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Any => '-',
            Symbol::Star => '★',
        }
    }

    fn fixed(self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Landscape {
    symbols: Vec<Symbol>,
    star: usize,
}

impl Landscape {
    pub fn parse(text: &str) -> Result<Landscape> {
        let fail = |reason: &str| Error::Landscape {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let symbols = text
            .chars()
            .map(|c| match c {
                '0' => Ok(Symbol::Zero),
                '1' => Ok(Symbol::One),
                '-' => Ok(Symbol::Any),
                '★' | '*' => Ok(Symbol::Star),
                other => Err(fail(&format!("unexpected symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if symbols.is_empty() {
            return Err(fail("empty"));
        }
        let stars: Vec<usize> = (0..symbols.len())
            .filter(|&i| symbols[i] == Symbol::Star)
            .collect();
        let star = match stars.as_slice() {
            [] => return Err(fail("no star")),
            [s] => *s,
            _ => return Err(fail("more than one star")),
        };
        let last = symbols.len() - 1;
        if star == 0 || star == last {
            return Err(fail("star at an end"));
        }
        if symbols[0] == Symbol::Any || symbols[last] == Symbol::Any {
            return Err(fail("dash at an end"));
        }
        if symbols.len() as u32 > MAX_ARITY {
            return Err(fail("too long"));
        }
        Ok(Landscape { symbols, star })
    }

    /// Builds from care/value bit masks (bit `p` = position `p`, star excluded).
    fn from_masks(k: usize, star: usize, care: u32, val: u32) -> Landscape {
        let symbols = (0..k)
            .map(|p| {
                if p == star {
                    Symbol::Star
                } else if care >> p & 1 == 0 {
                    Symbol::Any
                } else if val >> p & 1 == 1 {
                    Symbol::One
                } else {
                    Symbol::Zero
                }
            })
            .collect();
        Landscape { symbols, star }
    }

    pub fn k(&self) -> u32 {
        self.symbols.len() as u32
    }

    /// 1-based star position `s`.
    pub fn s(&self) -> u32 {
        self.star as u32 + 1
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// `ε_i` for `i` relative to the star; `None` outside the string.
    pub fn epsilon(&self, i: i32) -> Option<Symbol> {
        let p = self.star as i32 + i;
        (p >= 0)
            .then(|| self.symbols.get(p as usize).copied())
            .flatten()
    }

    fn masks(&self) -> (u32, u32) {
        let mut care = 0u32;
        let mut val = 0u32;
        for (p, s) in self.symbols.iter().enumerate() {
            if let Some(b) = s.fixed() {
                care |= 1 << p;
                val |= u32::from(b) << p;
            }
        }
        (care, val)
    }

    /// Read backwards.
    pub fn reverse(&self) -> Landscape {
        let symbols: Vec<Symbol> = self.symbols.iter().rev().copied().collect();
        Landscape {
            star: symbols.len() - 1 - self.star,
            symbols,
        }
    }

    /// Swap every `0` and `1`.
    pub fn complement(&self) -> Landscape {
        let symbols = self
            .symbols
            .iter()
            .map(|s| match s {
                Symbol::Zero => Symbol::One,
                Symbol::One => Symbol::Zero,
                other => *other,
            })
            .collect();
        Landscape {
            symbols,
            star: self.star,
        }
    }

    pub fn to_ascii(&self) -> String {
        self.to_string().replace('★', "*")
    }

    pub fn compile(&self) -> Rule {
        let (care, val) = self.masks();
        let (care, val) = (u64::from(care), u64::from(val));
        let star = self.star;
        let words = tabulate(self.k(), |v| (v >> star & 1 == 1) ^ (v & care == val));
        Rule::from_words(self.k(), words, star as i64)
            .expect("landscape functions depend on the centre")
    }

    pub fn is_conserved(&self) -> bool {
        let (care, val) = self.masks();
        conserved_masks(self.star, care, val)
    }
}

/// For every fixed position at distance `d` from the star there must be two
/// fixed positions `d` apart holding different bits.
fn conserved_masks(star: usize, care: u32, val: u32) -> bool {
    let mut distances = 0u32;
    let mut c = care;
    while c != 0 {
        let p = c.trailing_zeros() as usize;
        distances |= 1 << p.abs_diff(star);
        c &= c - 1;
    }
    while distances != 0 {
        let d = distances.trailing_zeros();
        if care & (care >> d) & (val ^ (val >> d)) == 0 {
            return false;
        }
        distances &= distances - 1;
    }
    true
}

impl fmt::Display for Landscape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{}", s.unicode())?;
        }
        Ok(())
    }
}

impl FromStr for Landscape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Landscape> {
        Landscape::parse(s)
    }
}

impl Serialize for Landscape {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn parse_landscape(text: &str) -> Result<Landscape> {
    Landscape::parse(text)
}

pub fn compile(l: &Landscape) -> Rule {
    l.compile()
}

pub fn is_conserved(l: &Landscape) -> bool {
    l.is_conserved()
}

/// Finds `j` such that `f ⊕ x_j` ignores `x_j` and every shifted product
/// `(f ⊕ x_j)(f(x_{1+t}, ...) ⊕ x_{j+t})` vanishes for the `t` it depends on.
/// Success implies `F² = I` under the placement centred at `x_j`.
pub fn check_shift_product(rule: &Rule) -> Option<u32> {
    let k = rule.k();
    let kmask = (1u64 << k) - 1;
    (1..=k).find(|&j| {
        let h = |w: u64| rule.eval(w) ^ (w >> (j - 1) & 1 == 1);
        let depends = |var: u32| (0..1u64 << k).any(|w| h(w) != h(w ^ (1 << var)));
        if depends(j - 1) {
            return false;
        }
        (0..k)
            .filter(|&var| var != j - 1 && depends(var))
            .all(|var| {
                let t = var as i64 - (j as i64 - 1);
                let span = k + t.unsigned_abs() as u32;
                let (first_at, second_at) = if t > 0 {
                    (0, t as u32)
                } else {
                    ((-t) as u32, 0)
                };
                (0..1u64 << span).all(|z| !(h(z >> first_at & kmask) && h(z >> second_at & kmask)))
            })
    })
}

/// A set of landscapes aligned on their stars; a cell flips when at least one
/// member matches around it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandscapeSet {
    members: Vec<Landscape>,
}

impl LandscapeSet {
    pub fn new(members: Vec<Landscape>) -> Result<LandscapeSet> {
        if members.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(LandscapeSet { members })
    }

    pub fn members(&self) -> &[Landscape] {
        &self.members
    }

    pub fn compile(&self) -> Result<Rule> {
        let left = self.members.iter().map(|l| l.star).max().unwrap();
        let right = self
            .members
            .iter()
            .map(|l| l.symbols.len() - 1 - l.star)
            .max()
            .unwrap();
        let width = (left + right + 1) as u32;
        if width > MAX_ARITY {
            return Err(Error::Arity {
                k: width,
                max: MAX_ARITY,
            });
        }
        let patterns: Vec<(u64, u64)> = self
            .members
            .iter()
            .map(|l| {
                let (care, val) = l.masks();
                let off = left - l.star;
                (u64::from(care) << off, u64::from(val) << off)
            })
            .collect();
        let words = tabulate(width, |v| {
            (v >> left & 1 == 1) ^ patterns.iter().any(|&(c, x)| v & c == x)
        });
        Rule::from_words(width, words, left as i64)
    }
}

pub fn compile_set(set: &LandscapeSet) -> Result<Rule> {
    set.compile()
}

/// Counts of conserved landscapes of one diameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConservedCensus {
    pub k: u32,
    pub count: u64,
    pub classes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landscapes: Option<Vec<Landscape>>,
}

/// Per-star-position tallies: total, palindromes, and anti-palindromes
/// (fixed points of reverse and of reverse∘complement).
fn scan_star(k: usize, star: usize, mut visit: impl FnMut(u32, u32)) -> (u64, u64, u64) {
    let interior: Vec<usize> = (1..k - 1).filter(|&p| p != star).collect();
    let top = k - 1;
    let mirror = |m: u32| m.reverse_bits() >> (32 - k);
    let centred = 2 * star == top;
    let (mut total, mut pal, mut anti) = (0u64, 0u64, 0u64);
    let combos = 3u64.pow(interior.len() as u32);
    for ends in 0..4u32 {
        let base_care = 1u32 | (1 << top);
        let base_val = (ends & 1) | ((ends >> 1) << top);
        for code in 0..combos {
            let mut care = base_care;
            let mut val = base_val;
            let mut c = code;
            for &p in &interior {
                match c % 3 {
                    0 => care |= 1 << p,
                    1 => {
                        care |= 1 << p;
                        val |= 1 << p;
                    }
                    _ => {}
                }
                c /= 3;
            }
            if !conserved_masks(star, care, val) {
                continue;
            }
            total += 1;
            if centred && mirror(care) == care {
                let rv = mirror(val);
                if rv == val {
                    pal += 1;
                }
                if rv == val ^ care {
                    anti += 1;
                }
            }
            visit(care, val);
        }
    }
    (total, pal, anti)
}

fn check_enumeration_k(k: u32) -> Result<()> {
    if !(3..=MAX_ARITY).contains(&k) {
        return Err(Error::Arity { k, max: MAX_ARITY });
    }
    Ok(())
}

/// Number of conserved landscapes of length `k` and number of elementary
/// equivalence classes, counted as orbits of the string group
/// {reverse, complement} by Burnside's lemma. Streams; no list is kept.
pub fn count_conserved(k: u32) -> Result<(u64, u64)> {
    check_enumeration_k(k)?;
    let ku = k as usize;
    let (total, pal, anti) = (1..ku - 1)
        .into_par_iter()
        .map(|star| scan_star(ku, star, |_, _| {}))
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    // Complement fixes no landscape: both ends are 0/1.
    Ok((total, (total + pal + anti) / 4))
}

/// Full listing, with classes counted by canonicalizing the compiled rules.
pub fn enumerate_conserved(k: u32) -> Result<ConservedCensus> {
    check_enumeration_k(k)?;
    let ku = k as usize;
    let landscapes: Vec<Landscape> = (1..ku - 1)
        .into_par_iter()
        .flat_map_iter(|star| {
            let mut found = Vec::new();
            scan_star(ku, star, |care, val| {
                found.push(Landscape::from_masks(ku, star, care, val))
            });
            found
        })
        .collect();
    let mut classes: Vec<_> = landscapes
        .par_iter()
        .map(|l| l.compile().canonicalize())
        .collect();
    classes.par_sort_unstable();
    classes.dedup();
    Ok(ConservedCensus {
        k,
        count: landscapes.len() as u64,
        classes: classes.len() as u64,
        landscapes: Some(landscapes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{induce, iterate_order, IterateOrder};

    fn l(s: &str) -> Landscape {
        Landscape::parse(s).unwrap()
    }

    #[test]
    fn parse_positions() {
        let p = l("0★10");
        assert_eq!(p.s(), 2);
        assert_eq!(p.epsilon(-1), Some(Symbol::Zero));
        assert_eq!(p.epsilon(1), Some(Symbol::One));
        assert_eq!(p.epsilon(2), Some(Symbol::Zero));
        assert_eq!(p.epsilon(3), None);
        let q = l("0-*100");
        assert_eq!((q.k(), q.s()), (6, 3));
        assert_eq!(q.to_string(), "0-★100");
        assert_eq!(q.to_ascii(), "0-*100");
    }

    #[test]
    fn parse_errors() {
        for bad in ["★01", "01★", "", "0110", "0★1★0", "-★10", "0★1-", "0★x0"] {
            assert!(Landscape::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn compile_listing_identities() {
        let cases = [
            ("1★01", "x2 ^ x1 (x3 ^ 1) x4"),
            ("0★10", "x2 ^ (x1 ^ 1) x3 (x4 ^ 1)"),
            ("10★10", "x3 ^ x1 (x2 ^ 1) x4 (x5 ^ 1)"),
            ("1★100", "x2 ^ x1 x3 (x4 ^ 1) (x5 ^ 1)"),
            ("11★01", "x3 ^ x1 x2 (x4 ^ 1) x5"),
        ];
        for (land, poly) in cases {
            assert_eq!(
                l(land).compile(),
                Rule::parse_polynomial(poly).unwrap(),
                "{land}"
            );
        }
        assert_eq!(l("0★10").compile().shift(), 1);
    }

    #[test]
    fn conserved_examples() {
        assert!(l("0★10").is_conserved());
        assert!(l("1★01").is_conserved());
        assert!(!l("0★11").is_conserved());
    }

    /// Direct transcription of the pairing condition over relative indices.
    fn conserved_oracle(land: &Landscape) -> bool {
        let k = land.k() as i32;
        let s = land.s() as i32;
        let fixed = |i: i32| land.epsilon(i).and_then(Symbol::fixed);
        (1 - s..=k - s).filter(|&d1| fixed(d1).is_some()).all(|d1| {
            (1 - s..=k - s).any(|d2| match (fixed(d2), fixed(d1 + d2)) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            })
        })
    }

    #[test]
    fn conserved_matches_oracle_exhaustively() {
        for k in 3..=8u32 {
            let ku = k as usize;
            for star in 1..ku - 1 {
                let interior: Vec<usize> = (1..ku - 1).filter(|&p| p != star).collect();
                for ends in 0..4u32 {
                    for code in 0..3u32.pow(interior.len() as u32) {
                        let mut care = 1 | 1 << (ku - 1);
                        let mut val = (ends & 1) | (ends >> 1) << (ku - 1);
                        let mut c = code;
                        for &p in &interior {
                            if c % 3 != 2 {
                                care |= 1 << p;
                                val |= (c % 3) << p;
                            }
                            c /= 3;
                        }
                        let land = Landscape::from_masks(ku, star, care, val);
                        assert_eq!(land.is_conserved(), conserved_oracle(&land), "{land}");
                    }
                }
            }
        }
    }

    #[test]
    fn shift_product_examples() {
        let f = Rule::parse_polynomial("x2 ^ x1 (x3 ^ 1) x4").unwrap();
        assert_eq!(check_shift_product(&f), Some(2));
        assert_eq!(
            check_shift_product(&Rule::parse_polynomial("x1 ^ x2").unwrap()),
            None
        );
    }

    #[test]
    fn conserved_landscapes_are_involutions() {
        for k in 4..=8 {
            for land in enumerate_conserved(k).unwrap().landscapes.unwrap() {
                let r = land.compile();
                assert_eq!(
                    iterate_order(&r, 2),
                    IterateOrder::Found {
                        order: 2,
                        offset: 0
                    },
                    "{land}"
                );
                assert!(check_shift_product(&r).is_some(), "{land}");
            }
        }
    }

    #[test]
    fn shift_product_implies_circular_involution() {
        for k in 4..=6 {
            for land in enumerate_conserved(k).unwrap().landscapes.unwrap() {
                let r = land.compile();
                for n in k..=11 {
                    let m = induce(&r, n).unwrap();
                    for x in (0..1u64 << n).step_by(7) {
                        assert_eq!(m.apply_placed(m.apply_placed(x)), x);
                    }
                }
            }
        }
    }

    #[test]
    fn string_group_commutes_with_compile() {
        for land in enumerate_conserved(7).unwrap().landscapes.unwrap() {
            assert_eq!(land.reverse().compile(), land.compile().reverse());
            assert_eq!(land.complement().compile(), land.compile().complement());
        }
    }

    #[test]
    fn set_semantics() {
        let single = LandscapeSet::new(vec![l("0★10")]).unwrap();
        assert_eq!(single.compile().unwrap(), l("0★10").compile());
        assert_eq!(LandscapeSet::new(vec![]), Err(Error::EmptySet));
    }

    #[test]
    fn small_census() {
        assert_eq!(count_conserved(4).unwrap(), (4, 1));
        assert_eq!(count_conserved(6).unwrap(), (72, 18));
        let census = enumerate_conserved(6).unwrap();
        assert_eq!((census.count, census.classes), (72, 18));
    }
}
