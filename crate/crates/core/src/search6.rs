//! Exhaustive search for diameter-6 rules whose induced map is an involution.
//!
//! The offset-`s` automaton is `F(x)_i = f(x_{i-s+1}, ..., x_{i-s+6})`. An
//! involution maps sequences of primitive period `p` to sequences of the same
//! primitive period, and commutes with the shift, so on periodic sequences it
//! is a rotation-aligned involutive matching of necklace classes. Enumerating
//! those matchings for `p ≤ 5` pins `f` on every 6-bit window that occurs in
//! such a sequence; the remaining windows are completed by a depth-first
//! search that propagates the 11-variable identity `f∘f = x_{2s-1}`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rule::{EquivClassId, Rule};

const WINDOWS: usize = 64;
const MAX_PERIOD: u32 = 5;

fn mobius(mut n: u32) -> i64 {
    let mut result = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// `b_p`: the number of binary sequences of primitive period `p`.
pub fn count_primitive_sequences(p: u32) -> u64 {
    assert!((1..64).contains(&p), "period out of range");
    let total: i64 = (1..=p)
        .filter(|d| p.is_multiple_of(*d))
        .map(|d| mobius(d) * (1i64 << (p / d)))
        .sum();
    total as u64
}

fn binom(n: u128, k: u128) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of shift-commuting involutions on sequences of primitive period `p`:
/// `Σ_i C(r,2i)·(2i-1)!!·p^i`, times `2^(r-2i)` for even `p`, with `r = b_p/p`.
/// `None` on overflow.
pub fn count_period_mappings(p: u32) -> Option<u128> {
    let r = u128::from(count_primitive_sequences(p) / u64::from(p));
    let p = u128::from(p);
    let mut total: u128 = 0;
    for i in 0..=r / 2 {
        let mut term = binom(r, 2 * i)?;
        for odd in (1..2 * i).step_by(2) {
            term = term.checked_mul(odd)?;
        }
        term = term.checked_mul(p.checked_pow(i as u32)?)?;
        if p % 2 == 0 {
            term = term.checked_mul(1u128.checked_shl((r - 2 * i) as u32)?)?;
        }
        total = total.checked_add(term)?;
    }
    Some(total)
}

/// Rotation class of sequences with primitive period `p`, stored as `p`-bit
/// words (bit `i` is position `i`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NecklaceClass {
    pub p: u32,
    /// Numerically smallest rotation.
    pub representative: u32,
    pub members: Vec<u32>,
}

fn rotate(x: u32, c: u32, p: u32) -> u32 {
    let c = c % p;
    let mask = (1u32 << p) - 1;
    if c == 0 {
        x
    } else {
        ((x >> c) | (x << (p - c))) & mask
    }
}

pub fn necklace_classes(p: u32) -> Vec<NecklaceClass> {
    assert!((1..32).contains(&p), "period out of range");
    (0..1u32 << p)
        .filter_map(|x| {
            let members: Vec<u32> = (0..p).map(|c| rotate(x, c, p)).collect();
            let primitive = (1..p).all(|c| members[c as usize] != x);
            let least = members.iter().all(|&m| m >= x);
            (primitive && least).then_some(NecklaceClass {
                p,
                representative: x,
                members,
            })
        })
        .collect()
}

/// A partial truth table of a 6-variable rule: window `w` is fixed when bit
/// `w` of `mask` is set, with value bit `w` of `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartialTable {
    pub mask: u64,
    pub value: u64,
}

impl PartialTable {
    fn merge(self, other: PartialTable) -> Option<PartialTable> {
        ((self.mask & other.mask & (self.value ^ other.value)) == 0).then_some(PartialTable {
            mask: self.mask | other.mask,
            value: self.value | other.value,
        })
    }

    pub fn fixed(&self) -> u32 {
        self.mask.count_ones()
    }
}

/// Image choice for one necklace class: `F(rep) = rotate(target, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Image {
    pub class: u32,
    pub target: u32,
    pub rotation: u32,
}

/// One involutive, shift-commuting map on a single period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodMapping {
    pub p: u32,
    pub images: Vec<Image>,
}

impl PeriodMapping {
    /// Windows `x[i-s+1..i-s+6]` receive `F(x)_i` for every member sequence.
    pub fn windows(&self, classes: &[NecklaceClass], s: i64) -> PartialTable {
        let p = self.p;
        let mut t = PartialTable::default();
        for img in &self.images {
            let x = classes[img.class as usize].representative;
            let y = rotate(classes[img.target as usize].representative, img.rotation, p);
            for i in 0..p as i64 {
                let w = (0..6).fold(0u64, |w, j| {
                    let pos = (i - s + 1 + j).rem_euclid(i64::from(p)) as u32;
                    w | (u64::from((x >> pos) & 1) << j)
                });
                let bit = u64::from((y >> i) & 1);
                debug_assert!(t.mask >> w & 1 == 0 || (t.value >> w & 1) == bit);
                t.mask |= 1 << w;
                t.value |= bit << w;
            }
        }
        t
    }
}

/// All shift-commuting involutions on sequences of primitive period `p`.
pub fn period_mappings(p: u32) -> Vec<PeriodMapping> {
    let r = necklace_classes(p).len() as u32;
    let mut out = Vec::new();
    let mut images = Vec::new();
    let mut used = vec![false; r as usize];
    matchings(p, &mut used, &mut images, &mut out);
    out
}

fn matchings(p: u32, used: &mut [bool], images: &mut Vec<Image>, out: &mut Vec<PeriodMapping>) {
    let Some(c) = used.iter().position(|&u| !u) else {
        out.push(PeriodMapping {
            p,
            images: images.clone(),
        });
        return;
    };
    let c = c as u32;
    used[c as usize] = true;
    let self_rotations: &[u32] = if p.is_multiple_of(2) {
        &[0, p / 2]
    } else {
        &[0]
    };
    for &rot in self_rotations {
        images.push(Image {
            class: c,
            target: c,
            rotation: rot,
        });
        matchings(p, used, images, out);
        images.pop();
    }
    for d in c + 1..used.len() as u32 {
        if used[d as usize] {
            continue;
        }
        used[d as usize] = true;
        for rot in 0..p {
            // F(rep_c) = σ^rot rep_d forces F(rep_d) = σ^(-rot) rep_c.
            images.push(Image {
                class: c,
                target: d,
                rotation: rot,
            });
            images.push(Image {
                class: d,
                target: c,
                rotation: (p - rot) % p,
            });
            matchings(p, used, images, out);
            images.pop();
            images.pop();
        }
        used[d as usize] = false;
    }
    used[c as usize] = false;
}

/// Windows occurring in some sequence of period at most five.
pub fn periodic_windows() -> u64 {
    (0..WINDOWS as u64)
        .filter(|&w| (1..=3).any(|j| w & ((1 << j) - 1) == w >> (6 - j)))
        .fold(0, |m, w| m | 1 << w)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssignmentStats {
    pub s: u32,
    /// Mappings per period `1..=5` after the `f(0)` restriction.
    pub mappings: Vec<u64>,
    pub combinations: u64,
    /// Collision-free partial combinations over periods `1..=p`.
    pub survivors_by_period: Vec<u64>,
    pub survivors: u64,
    pub fixed_windows: u32,
}

/// Collision-free combinations of per-period involutions for offset `s`.
#[derive(Debug, Clone)]
pub struct PeriodicAssignments {
    pub stats: AssignmentStats,
    pub tables: Vec<PartialTable>,
}

/// Combines the per-period mappings and discards those that assign two values
/// to one window. With `constant_free`, `f(0) = 0` is enforced.
pub fn enumerate_periodic_assignments(s: u32, constant_free: bool) -> Result<PeriodicAssignments> {
    if !(1..=6).contains(&s) {
        return Err(Error::Offset { s });
    }
    let per_period: Vec<Vec<PartialTable>> = (1..=MAX_PERIOD)
        .map(|p| {
            let classes = necklace_classes(p);
            period_mappings(p)
                .iter()
                .map(|m| m.windows(&classes, i64::from(s)))
                .filter(|t| !constant_free || t.value & 1 == 0)
                .collect()
        })
        .collect();
    let mappings: Vec<u64> = per_period.iter().map(|v| v.len() as u64).collect();
    let mut frontier = vec![PartialTable::default()];
    let mut survivors_by_period = Vec::new();
    for options in &per_period {
        frontier = frontier
            .par_iter()
            .flat_map_iter(|acc| options.iter().filter_map(move |o| acc.merge(*o)))
            .collect();
        survivors_by_period.push(frontier.len() as u64);
    }
    frontier.sort_unstable();
    let fixed_windows = frontier.first().map_or(0, |t| t.fixed());
    debug_assert!(frontier.iter().all(|t| t.mask == periodic_windows()));
    Ok(PeriodicAssignments {
        stats: AssignmentStats {
            s,
            combinations: mappings.iter().product(),
            survivors: frontier.len() as u64,
            mappings,
            survivors_by_period,
            fixed_windows,
        },
        tables: frontier,
    })
}

/// `g(x) = f(f(x>>0 & 63), ..., f(x>>5 & 63))` for an 11-bit `x`.
fn square_at(table: u64, x: u64) -> u64 {
    let mid = (0..6).fold(0u64, |t, j| t | ((table >> ((x >> j) & 63)) & 1) << j);
    (table >> mid) & 1
}

/// Whether a raw 6-variable table at offset `s` satisfies `f∘f = x_{2s-1}`.
pub fn involution_table_check(table: u64, s: u32) -> bool {
    (1..=6).contains(&s) && (0..1u64 << 11).all(|x| square_at(table, x) == (x >> (2 * s - 2)) & 1)
}

/// Tight diameter 6 and an involutive offset-`s` automaton.
pub fn involution_rule_check(rule: &Rule, s: u32) -> bool {
    rule.k() == 6 && involution_table_check(rule.words()[0], s)
}

struct Completer {
    /// Constraint inputs `x` that read window `w`.
    readers: Vec<Vec<u16>>,
    target_bit: u32,
}

impl Completer {
    fn new(s: u32) -> Completer {
        let mut readers = vec![Vec::new(); WINDOWS];
        for x in 0..1u16 << 11 {
            let mut seen = 0u64;
            for j in 0..6 {
                let w = (x >> j) & 63;
                if seen >> w & 1 == 0 {
                    seen |= 1 << w;
                    readers[w as usize].push(x);
                }
            }
        }
        Completer {
            readers,
            target_bit: 2 * s - 2,
        }
    }

    fn propagate(&self, t: &mut PartialTable, queue: &mut Vec<u8>) -> bool {
        while let Some(w) = queue.pop() {
            for &x in &self.readers[w as usize] {
                let x = u64::from(x);
                let mut mid = 0u64;
                let mut complete = true;
                for j in 0..6 {
                    let u = (x >> j) & 63;
                    if t.mask >> u & 1 == 0 {
                        complete = false;
                        break;
                    }
                    mid |= ((t.value >> u) & 1) << j;
                }
                if !complete {
                    continue;
                }
                let want = (x >> self.target_bit) & 1;
                if t.mask >> mid & 1 == 1 {
                    if (t.value >> mid) & 1 != want {
                        return false;
                    }
                } else {
                    t.mask |= 1 << mid;
                    t.value |= want << mid;
                    queue.push(mid as u8);
                }
            }
        }
        let ones = t.value.count_ones();
        let zeros = t.mask.count_ones() - ones;
        ones <= 32 && zeros <= 32
    }

    fn complete(&self, start: PartialTable) -> Vec<u64> {
        let mut t = start;
        let mut queue: Vec<u8> = (0..WINDOWS as u8)
            .filter(|&w| t.mask >> w & 1 == 1)
            .collect();
        let mut out = Vec::new();
        if self.propagate(&mut t, &mut queue) {
            self.dfs(t, &mut out);
        }
        out
    }

    fn dfs(&self, t: PartialTable, out: &mut Vec<u64>) {
        if t.mask == u64::MAX {
            out.push(t.value);
            return;
        }
        let w = (!t.mask).trailing_zeros() as u8;
        for bit in 0..2u64 {
            let mut next = PartialTable {
                mask: t.mask | 1 << w,
                value: t.value | bit << w,
            };
            let mut queue = vec![w];
            if self.propagate(&mut next, &mut queue) {
                self.dfs(next, out);
            }
        }
    }
}

/// A diameter-6 rule whose offset-`s` automaton is an involution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Involution6 {
    pub s: u32,
    #[serde(serialize_with = "crate::search6::display")]
    pub rule: Rule,
    #[serde(rename = "class", serialize_with = "crate::search6::display")]
    pub class_id: EquivClassId,
    pub anf: String,
}

fn display<T: std::fmt::Display, S: serde::Serializer>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl Involution6 {
    fn new(rule: Rule, s: u32) -> Involution6 {
        Involution6 {
            s,
            class_id: rule.canonicalize(),
            anf: rule.to_anf().to_string(),
            rule,
        }
    }

    /// The automaton's rule with its placement: shift `s - 1`.
    pub fn placed(&self) -> Rule {
        self.rule.clone().with_shift(i64::from(self.s) - 1)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Search6Report {
    pub stats: AssignmentStats,
    pub functions: Vec<Involution6>,
    pub classes: usize,
}

/// Completes every collision-free periodic assignment for offset `s` and keeps
/// the involutions of tight diameter 6.
pub fn complete_search(s: u32, constant_free: bool) -> Result<Search6Report> {
    let assignments = enumerate_periodic_assignments(s, constant_free)?;
    let completer = Completer::new(s);
    let tables: BTreeSet<u64> = assignments
        .tables
        .par_iter()
        .flat_map_iter(|t| completer.complete(*t))
        .collect();
    let functions: Vec<Involution6> = tables
        .into_iter()
        .filter_map(|v| Rule::from_words(6, vec![v], 0).ok())
        .filter(|r| r.k() == 6)
        .map(|r| Involution6::new(r, s))
        .collect();
    let classes = functions
        .iter()
        .map(|f| f.class_id.clone())
        .collect::<BTreeSet<_>>()
        .len();
    Ok(Search6Report {
        stats: assignments.stats,
        functions,
        classes,
    })
}

/// Results for `s = 2..=5`, the outer two offsets derived by reversal.
#[derive(Debug, Clone, Serialize)]
pub struct PooledSearch {
    pub functions: Vec<Involution6>,
    pub classes: Vec<EquivClassId>,
}

pub fn pool(s2: &Search6Report, s3: &Search6Report) -> PooledSearch {
    let mirrored = |rep: &Search6Report| -> Vec<Involution6> {
        rep.functions
            .iter()
            .map(|f| Involution6::new(f.rule.reverse(), 7 - f.s))
            .collect()
    };
    let mut functions: Vec<Involution6> = s2.functions.clone();
    functions.extend(s3.functions.iter().cloned());
    functions.extend(mirrored(s3));
    functions.extend(mirrored(s2));
    let classes: BTreeSet<EquivClassId> = functions.iter().map(|f| f.class_id.clone()).collect();
    PooledSearch {
        functions,
        classes: classes.into_iter().collect(),
    }
}
