//! Truth tables, algebraic normal form, and the reverse/complement equivalence
//! group for local rules.
//!
//! A rule of diameter `k` stores `2^k` bits. Entry `v` holds `f(x1, ..., xk)`
//! with `x_{i+1}` equal to bit `i` of `v`, so `x1` is the least significant
//! index bit and a window of a configuration is a shift-and-mask away.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported diameter.
pub const MAX_ARITY: u32 = 24;

/// `MOBIUS_MASKS[i]` selects the in-word positions whose bit `i` is clear.
const MOBIUS_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

pub(crate) fn words_for(k: u32) -> usize {
    if k <= 6 {
        1
    } else {
        1usize << (k - 6)
    }
}

fn low_mask(k: u32) -> u64 {
    if k >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << k)) - 1
    }
}

#[inline]
pub(crate) fn get_bit(words: &[u64], v: u64) -> bool {
    (words[(v >> 6) as usize] >> (v & 63)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], v: u64) {
    words[(v >> 6) as usize] |= 1u64 << (v & 63);
}

/// Builds a packed table by evaluating `f` on every index below `2^k`.
pub(crate) fn tabulate(k: u32, f: impl Fn(u64) -> bool) -> Vec<u64> {
    let mut words = vec![0u64; words_for(k)];
    for v in 0..(1u64 << k) {
        if f(v) {
            set_bit(&mut words, v);
        }
    }
    words
}

fn is_essential(k: u32, words: &[u64], var: u32) -> bool {
    if var < 6 {
        let sh = 1u32 << var;
        words
            .iter()
            .any(|&w| ((w >> sh) ^ w) & MOBIUS_MASKS[var as usize] != 0)
    } else {
        debug_assert!(var < k);
        let stride = 1usize << (var - 6);
        (0..words.len())
            .filter(|j| j & stride == 0)
            .any(|j| words[j] != words[j | stride])
    }
}

/// 0-based indices of the lowest and highest essential variables.
pub(crate) fn essential_span(k: u32, words: &[u64]) -> Option<(u32, u32)> {
    let lo = (0..k).find(|&i| is_essential(k, words, i))?;
    let hi = (lo..k).rev().find(|&i| is_essential(k, words, i))?;
    Some((lo, hi))
}

fn mobius_in_place(k: u32, words: &mut [u64]) {
    for i in 0..k.min(6) {
        let m = MOBIUS_MASKS[i as usize];
        for w in words.iter_mut() {
            *w ^= (*w & m) << (1u32 << i);
        }
    }
    for i in 6..k {
        let stride = 1usize << (i - 6);
        for j in 0..words.len() {
            if j & stride == 0 {
                words[j | stride] ^= words[j];
            }
        }
    }
}

/// Numeric comparison of two packed tables of equal length.
fn cmp_tables(a: &[u64], b: &[u64]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

/// A local rule of tight diameter `k`.
///
/// `shift` places the rule on the line: the induced cellular automaton is
/// `F(x)_i = f(x_{i-shift}, ..., x_{i-shift+k-1})`. Normalizing a table that
/// only depends on variables `x_lo..x_hi` slides the window and lowers the
/// shift by `lo - 1`. Equality and hashing ignore the shift; it is placement
/// metadata, not part of the Boolean function.
#[derive(Clone, Debug)]
pub struct Rule {
    k: u32,
    table: Vec<u64>,
    shift: i64,
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.table == other.table
    }
}

impl Eq for Rule {}

impl Hash for Rule {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.k.hash(state);
        self.table.hash(state);
    }
}

impl Rule {
    /// Normalizes a truth table given as one bit per entry.
    pub fn from_table(k: u32, table: &[bool]) -> Result<Rule> {
        check_arity(k)?;
        let expected = 1usize << k;
        if table.len() != expected {
            return Err(Error::TableLength {
                k,
                got: table.len(),
                expected,
            });
        }
        Self::from_words(k, tabulate(k, |v| table[v as usize]), 0)
    }

    /// Normalizes a packed table (`words_for(k)` words, unused high bits zero).
    pub fn from_words(k: u32, mut words: Vec<u64>, shift: i64) -> Result<Rule> {
        check_arity(k)?;
        if words.len() != words_for(k) {
            return Err(Error::TableLength {
                k,
                got: words.len() * 64,
                expected: 1usize << k,
            });
        }
        if let Some(first) = words.first_mut() {
            if k < 6 {
                *first &= low_mask(k);
            }
        }
        let essential: Vec<u32> = (0..k).filter(|&i| is_essential(k, &words, i)).collect();
        let (lo, hi) = match (essential.first(), essential.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::ConstantRule),
        };
        let nk = hi - lo + 1;
        if lo == 0 && nk == k {
            return Ok(Rule {
                k,
                table: words,
                shift,
            });
        }
        let table = tabulate(nk, |v| get_bit(&words, v << lo));
        Ok(Rule {
            k: nk,
            table,
            shift: shift - i64::from(lo),
        })
    }

    /// Normalizes the table obtained by evaluating `f` on `0..2^k`.
    pub fn from_fn(k: u32, f: impl Fn(u64) -> bool) -> Result<Rule> {
        check_arity(k)?;
        Self::from_words(k, tabulate(k, f), 0)
    }

    /// The projection `x1`.
    pub fn identity() -> Rule {
        Rule {
            k: 1,
            table: vec![0b10],
            shift: 0,
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn words(&self) -> &[u64] {
        &self.table
    }

    pub fn with_shift(mut self, shift: i64) -> Rule {
        self.shift = shift;
        self
    }

    #[inline]
    pub fn eval(&self, v: u64) -> bool {
        get_bit(&self.table, v)
    }

    /// Evaluates on the variables `x1..xk` given as booleans.
    pub fn eval_vars(&self, xs: &[bool]) -> bool {
        debug_assert_eq!(xs.len(), self.k as usize);
        let v = xs
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i));
        self.eval(v)
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..1u64 << self.k).map(|v| self.eval(v)).collect()
    }

    /// True when the rule is a pure shift `x1` (as a function, whatever its placement).
    pub fn is_projection(&self) -> bool {
        self.k == 1 && self.table[0] == 0b10
    }

    pub fn weight(&self) -> u64 {
        self.table.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.weight() * 2 == 1u64 << self.k
    }

    pub fn to_anf(&self) -> Anf {
        Anf::from_words(self.k, self.table.clone())
    }

    pub fn from_anf(anf: &Anf) -> Result<Rule> {
        let mut words = anf.coefficients.clone();
        mobius_in_place(anf.k, &mut words);
        Rule::from_words(anf.k, words, 0)
    }

    pub fn degree(&self) -> u32 {
        self.to_anf().degree()
    }

    /// `f'(x1..xk) = f(xk..x1)`; the spatial mirror of the automaton.
    pub fn reverse(&self) -> Rule {
        let k = self.k;
        let table = tabulate(k, |v| self.eval(reverse_bits(v, k)));
        Rule {
            k,
            table,
            shift: i64::from(k) - 1 - self.shift,
        }
    }

    /// `f'(x) = f(!x) ^ 1`; conjugation of the automaton by bitwise complement.
    pub fn complement(&self) -> Rule {
        let k = self.k;
        let all = (1u64 << k) - 1;
        let table = tabulate(k, |v| !self.eval(all ^ v));
        Rule {
            k,
            table,
            shift: self.shift,
        }
    }

    /// The orbit under {id, reverse, complement, reverse∘complement}, deduplicated.
    pub fn orbit(&self) -> Vec<Rule> {
        let r = self.reverse();
        let c = self.complement();
        let rc = r.complement();
        let mut out: Vec<Rule> = Vec::with_capacity(4);
        for g in [self.clone(), r, c, rc] {
            if !out.contains(&g) {
                out.push(g);
            }
        }
        out
    }

    pub fn canonicalize(&self) -> EquivClassId {
        let canon = self
            .orbit()
            .into_iter()
            .map(|g| g.table)
            .min_by(|a, b| cmp_tables(a, b))
            .expect("orbit is never empty");
        EquivClassId { k: self.k, canon }
    }

    /// Parses a Boolean polynomial such as `x2 ^ x1 (x3 ^ 1) x4`.
    pub fn parse_polynomial(text: &str) -> Result<Rule> {
        let poly = crate::poly::Poly::parse(text)?;
        let k = poly.max_var();
        if k == 0 {
            return Err(Error::ConstantRule);
        }
        check_arity(k)?;
        Rule::from_fn(k, |v| poly.eval(v))
    }

    fn hex(&self) -> String {
        hex_table(self.k, &self.table)
    }
}

fn check_arity(k: u32) -> Result<()> {
    if k == 0 || k > MAX_ARITY {
        Err(Error::Arity { k, max: MAX_ARITY })
    } else {
        Ok(())
    }
}

pub(crate) fn reverse_bits(v: u64, k: u32) -> u64 {
    v.reverse_bits() >> (64 - k)
}

fn hex_table(k: u32, words: &[u64]) -> String {
    if k >= 6 {
        words.iter().rev().map(|w| format!("{w:016x}")).collect()
    } else {
        let width = ((1usize << k) / 4).max(1);
        format!("{:0width$x}", words[0], width = width)
    }
}

fn parse_hex_table(k: u32, hex: &str) -> Option<Vec<u64>> {
    let width = ((1usize << k) / 4).max(1);
    if hex.len() != width || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    if k >= 6 {
        let words: Option<Vec<u64>> = (0..hex.len() / 16)
            .rev()
            .map(|j| u64::from_str_radix(&hex[j * 16..j * 16 + 16], 16).ok())
            .collect();
        words
    } else {
        let w = u64::from_str_radix(hex, 16).ok()?;
        (w & !low_mask(k) == 0).then(|| vec![w])
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.k, self.hex())
    }
}

impl FromStr for Rule {
    type Err = Error;

    /// Parses `k:HEX`. The table is normalized, so a non-tight literal yields a
    /// smaller diameter.
    fn from_str(s: &str) -> Result<Rule> {
        let bad = || Error::RuleLiteral(s.to_string());
        let (k, hex) = s.trim().split_once(':').ok_or_else(bad)?;
        let k: u32 = k.parse().map_err(|_| bad())?;
        check_arity(k)?;
        let words = parse_hex_table(k, hex).ok_or_else(bad)?;
        Rule::from_words(k, words, 0)
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Identifier of an elementary equivalence class: the numerically smallest
/// table in the reverse/complement orbit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EquivClassId {
    k: u32,
    canon: Vec<u64>,
}

impl EquivClassId {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// The canonical representative as a rule (placed at shift 0).
    pub fn representative(&self) -> Rule {
        Rule {
            k: self.k,
            table: self.canon.clone(),
            shift: 0,
        }
    }
}

impl Ord for EquivClassId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.k
            .cmp(&other.k)
            .then_with(|| cmp_tables(&self.canon, &other.canon))
    }
}

impl PartialOrd for EquivClassId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EquivClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.k, hex_table(self.k, &self.canon))
    }
}

impl Serialize for EquivClassId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Algebraic normal form: XOR of monomials, each a set of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anf {
    k: u32,
    /// Coefficient bitset indexed by monomial mask.
    coefficients: Vec<u64>,
}

impl Anf {
    fn from_words(k: u32, mut words: Vec<u64>) -> Anf {
        mobius_in_place(k, &mut words);
        Anf {
            k,
            coefficients: words,
        }
    }

    /// ANF of an arbitrary (possibly constant) truth table.
    pub fn from_truth_table(k: u32, table: &[bool]) -> Result<Anf> {
        check_arity(k)?;
        if table.len() != 1usize << k {
            return Err(Error::TableLength {
                k,
                got: table.len(),
                expected: 1usize << k,
            });
        }
        Ok(Self::from_words(k, tabulate(k, |v| table[v as usize])))
    }

    /// Builds an ANF over `k` variables from monomials given as 1-based
    /// variable index sets.
    pub fn from_monomials(k: u32, monomials: &[&[u32]]) -> Result<Anf> {
        check_arity(k)?;
        let mut coefficients = vec![0u64; words_for(k)];
        for m in monomials {
            let mut mask = 0u64;
            for &var in *m {
                if var == 0 || var > k {
                    return Err(Error::Arity { k: var, max: k });
                }
                mask |= 1 << (var - 1);
            }
            coefficients[(mask >> 6) as usize] ^= 1 << (mask & 63);
        }
        Ok(Anf { k, coefficients })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Monomials as variable masks (bit `i` is `x_{i+1}`), in increasing mask order.
    pub fn monomial_masks(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for (j, &w) in self.coefficients.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as u64;
                out.push(((j as u64) << 6) | b);
                w &= w - 1;
            }
        }
        out
    }

    /// Monomials as sorted 1-based variable lists.
    pub fn monomials(&self) -> Vec<Vec<u32>> {
        self.monomial_masks()
            .into_iter()
            .map(|m| (0..64).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect())
            .collect()
    }

    pub fn degree(&self) -> u32 {
        self.monomial_masks()
            .into_iter()
            .map(u64::count_ones)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Anf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut monos = self.monomials();
        if monos.is_empty() {
            return f.write_str("0");
        }
        monos.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let terms: Vec<String> = monos
            .iter()
            .map(|m| {
                if m.is_empty() {
                    "1".to_string()
                } else {
                    m.iter()
                        .map(|i| format!("x{i}"))
                        .collect::<Vec<_>>()
                        .join("*")
                }
            })
            .collect();
        f.write_str(&terms.join(" ^ "))
    }
}
