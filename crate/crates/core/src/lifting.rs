//! Induced circular maps, lifting tests, and the exact properness decision.
//!
//! `InducedMap::apply` uses the offset-0 convention `F(x)_i = f(x_i, ..., x_{i+k-1})`
//! (indices mod n). `apply_placed` honours the rule's shift, which is what makes
//! `compose` an exact homomorphism of placed maps.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rule::{words_for, Rule, MAX_ARITY};

/// Default cap on the circular length for materialized bijectivity checks.
pub const DEFAULT_N_CAP: u32 = 24;

/// Largest diameter accepted by the pair-graph decision (2^(2k-2) nodes).
pub const PAIR_GRAPH_MAX_K: u32 = 14;

#[inline]
pub(crate) fn rotate_right(x: u64, c: u32, n: u32) -> u64 {
    let c = c % n;
    if c == 0 {
        return x;
    }
    let mask = (1u64 << n) - 1;
    ((x << c) | (x >> (n - c))) & mask
}

/// The circular map of length `n` induced by a rule.
#[derive(Clone, Debug)]
pub struct InducedMap {
    rule: Rule,
    n: u32,
}

impl InducedMap {
    pub fn new(rule: &Rule, n: u32) -> Result<InducedMap> {
        if n < rule.k() {
            return Err(Error::LengthBelowDiameter { n, k: rule.k() });
        }
        if n > 32 {
            return Err(Error::LengthCap { n, cap: 32 });
        }
        Ok(InducedMap {
            rule: rule.clone(),
            n,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// `F(x)_i = f(x_i, ..., x_{i+k-1})`, bit `i` of `x` being `x_{i+1}`.
    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        let n = self.n;
        let k = self.rule.k();
        let doubled = x | (x << n);
        let kmask = (1u64 << k) - 1;
        let mut out = 0u64;
        for i in 0..n {
            if self.rule.eval((doubled >> i) & kmask) {
                out |= 1 << i;
            }
        }
        out
    }

    /// The automaton placed by the rule's shift: `F(x)_i = f(x_{i-shift}, ...)`.
    pub fn apply_placed(&self, x: u64) -> u64 {
        let c = self.rule.shift().rem_euclid(i64::from(self.n)) as u32;
        rotate_right(self.apply(x), c, self.n)
    }

    /// Permutation-style table of `apply` over all `2^n` states.
    pub fn materialize(&self) -> Vec<u32> {
        (0..1u64 << self.n)
            .into_par_iter()
            .map(|x| self.apply(x) as u32)
            .collect()
    }
}

pub fn induce(rule: &Rule, n: u32) -> Result<InducedMap> {
    InducedMap::new(rule, n)
}

/// Returns the first collision `(x, x')` with `F(x) = F(x')`, if any.
fn find_collision(map: &InducedMap) -> Option<(u64, u64)> {
    let n = map.n();
    let mut seen = vec![0u64; words_for(n)];
    for x in 0..1u64 << n {
        let y = map.apply(x);
        let (w, b) = ((y >> 6) as usize, y & 63);
        if seen[w] >> b & 1 == 1 {
            let other = (0..x)
                .find(|&z| map.apply(z) == y)
                .expect("earlier preimage");
            return Some((other, x));
        }
        seen[w] |= 1 << b;
    }
    None
}

pub fn is_lifting(rule: &Rule, n: u32) -> Result<bool> {
    is_lifting_capped(rule, n, DEFAULT_N_CAP)
}

/// True iff the induced map on circular length `n` is a bijection.
pub fn is_lifting_capped(rule: &Rule, n: u32, cap: u32) -> Result<bool> {
    if n > cap {
        return Err(Error::LengthCap { n, cap });
    }
    let map = InducedMap::new(rule, n)?;
    Ok(find_collision(&map).is_none())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Proper,
    NotProper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PairGraph,
    FiniteScan,
}

/// Evidence that a rule is not injective.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Two bi-infinite configurations `L^∞ · M · R^∞` (bits left to right)
    /// with equal images.
    Pair {
        left_x: String,
        middle_x: String,
        right_x: String,
        left_y: String,
        middle_y: String,
        right_y: String,
    },
    /// Two distinct circular states of length `n` (bit `i` is cell `i`).
    Circular { n: u32, x: String, y: String },
}

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn string_to_bits(s: &str) -> Vec<bool> {
    s.bytes().map(|b| b == b'1').collect()
}

impl Witness {
    /// Checks the witness against the rule: the two configurations differ and
    /// every window has equal output.
    pub fn replays(&self, rule: &Rule) -> bool {
        let k = rule.k() as usize;
        match self {
            Witness::Circular { n, x, y } => {
                let (xs, ys) = (string_to_bits(x), string_to_bits(y));
                let n = *n as usize;
                if xs.len() != n || ys.len() != n || xs == ys || n < k {
                    return false;
                }
                (0..n).all(|i| {
                    let wx: Vec<bool> = (0..k).map(|t| xs[(i + t) % n]).collect();
                    let wy: Vec<bool> = (0..k).map(|t| ys[(i + t) % n]).collect();
                    rule.eval_vars(&wx) == rule.eval_vars(&wy)
                })
            }
            Witness::Pair {
                left_x,
                middle_x,
                right_x,
                left_y,
                middle_y,
                right_y,
            } => {
                let expand = |l: &str, m: &str, r: &str| -> Option<Vec<bool>> {
                    if l.is_empty() || r.is_empty() {
                        return None;
                    }
                    let mut out = Vec::new();
                    for _ in 0..=k {
                        out.extend(string_to_bits(l));
                    }
                    out.extend(string_to_bits(m));
                    for _ in 0..=k {
                        out.extend(string_to_bits(r));
                    }
                    Some(out)
                };
                if left_x.len() != left_y.len()
                    || middle_x.len() != middle_y.len()
                    || right_x.len() != right_y.len()
                {
                    return false;
                }
                let (Some(xs), Some(ys)) = (
                    expand(left_x, middle_x, right_x),
                    expand(left_y, middle_y, right_y),
                ) else {
                    return false;
                };
                xs != ys
                    && xs
                        .windows(k)
                        .zip(ys.windows(k))
                        .all(|(a, b)| rule.eval_vars(a) == rule.eval_vars(b))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropernessVerdict {
    pub decision: Decision,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl PropernessVerdict {
    pub fn is_proper(&self) -> bool {
        self.decision == Decision::Proper
    }
}

/// Exact decision of properness via injectivity on the full shift.
///
/// Nodes of the pair graph are pairs of `(k-1)`-bit words; `(u, v) -> (u', v')`
/// whenever appending one bit to each gives windows with equal output. The rule
/// is proper iff no off-diagonal node lies on a bi-infinite path, i.e. none is
/// both reachable from a cycle and able to reach one.
pub fn decide_proper(rule: &Rule) -> Result<PropernessVerdict> {
    let k = rule.k();
    if k > PAIR_GRAPH_MAX_K {
        return Err(Error::Arity {
            k,
            max: PAIR_GRAPH_MAX_K,
        });
    }
    if k == 1 {
        return Ok(PropernessVerdict {
            decision: Decision::Proper,
            method: Method::PairGraph,
            witness: None,
        });
    }
    let graph = PairGraph::new(rule);
    let backward = graph.survivors(Direction::Backward);
    let forward = graph.survivors(Direction::Forward);
    let candidate = (0..graph.nodes() as u32)
        .into_par_iter()
        .find_first(|&node| {
            let (u, v) = graph.split(node);
            u != v && backward[node as usize] && forward[node as usize]
        });
    Ok(match candidate {
        None => PropernessVerdict {
            decision: Decision::Proper,
            method: Method::PairGraph,
            witness: None,
        },
        Some(node) => PropernessVerdict {
            decision: Decision::NotProper,
            method: Method::PairGraph,
            witness: Some(graph.witness(node, &backward, &forward)),
        },
    })
}

/// Heuristic verdict from bijectivity on every circular length `k..=n_max`.
pub fn finite_scan(rule: &Rule, n_max: u32) -> Result<PropernessVerdict> {
    for n in rule.k()..=n_max {
        if n > DEFAULT_N_CAP {
            return Err(Error::LengthCap {
                n,
                cap: DEFAULT_N_CAP,
            });
        }
        let map = InducedMap::new(rule, n)?;
        if let Some((x, y)) = find_collision(&map) {
            let as_bits = |s: u64| -> String {
                bits_to_string(&(0..n).map(|i| s >> i & 1 == 1).collect::<Vec<_>>())
            };
            return Ok(PropernessVerdict {
                decision: Decision::NotProper,
                method: Method::FiniteScan,
                witness: Some(Witness::Circular {
                    n,
                    x: as_bits(x),
                    y: as_bits(y),
                }),
            });
        }
    }
    Ok(PropernessVerdict {
        decision: Decision::Proper,
        method: Method::FiniteScan,
        witness: None,
    })
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Backward,
}

struct PairGraph<'a> {
    rule: &'a Rule,
    /// Word width `k - 1`.
    w: u32,
}

impl<'a> PairGraph<'a> {
    fn new(rule: &'a Rule) -> Self {
        PairGraph {
            rule,
            w: rule.k() - 1,
        }
    }

    fn nodes(&self) -> usize {
        1usize << (2 * self.w)
    }

    fn split(&self, node: u32) -> (u32, u32) {
        (node >> self.w, node & ((1 << self.w) - 1))
    }

    fn join(&self, u: u32, v: u32) -> u32 {
        (u << self.w) | v
    }

    fn successors(&self, node: u32) -> impl Iterator<Item = u32> + '_ {
        let (u, v) = self.split(node);
        let w = self.w;
        (0..4u32).filter_map(move |ab| {
            let wu = u | ((ab & 1) << w);
            let wv = v | ((ab >> 1) << w);
            (self.rule.eval(u64::from(wu)) == self.rule.eval(u64::from(wv)))
                .then(|| self.join(wu >> 1, wv >> 1))
        })
    }

    fn predecessors(&self, node: u32) -> impl Iterator<Item = u32> + '_ {
        let (u, v) = self.split(node);
        let mask = (1u32 << self.w) - 1;
        (0..4u32).filter_map(move |cd| {
            let wu = (u << 1) | (cd & 1);
            let wv = (v << 1) | (cd >> 1);
            (self.rule.eval(u64::from(wu)) == self.rule.eval(u64::from(wv)))
                .then(|| self.join(wu & mask, wv & mask))
        })
    }

    /// Nodes left after repeatedly deleting nodes without predecessors
    /// (`Backward`: nodes with an infinite past) or without successors
    /// (`Forward`: nodes with an infinite future).
    fn survivors(&self, dir: Direction) -> Vec<bool> {
        let n = self.nodes();
        let mut degree: Vec<u8> = vec![0; n];
        for node in 0..n as u32 {
            for next in self.successors(node) {
                match dir {
                    Direction::Backward => degree[next as usize] += 1,
                    Direction::Forward => degree[node as usize] += 1,
                }
            }
        }
        let mut alive = vec![true; n];
        let mut stack: Vec<u32> = (0..n as u32).filter(|&x| degree[x as usize] == 0).collect();
        while let Some(node) = stack.pop() {
            alive[node as usize] = false;
            let affected: Vec<u32> = match dir {
                Direction::Backward => self.successors(node).collect(),
                Direction::Forward => self.predecessors(node).collect(),
            };
            for other in affected {
                let d = &mut degree[other as usize];
                *d -= 1;
                if *d == 0 {
                    stack.push(other);
                }
            }
        }
        alive
    }

    /// Bits appended when entering `node`: the top bit of each word.
    fn entry_bits(&self, node: u32) -> (bool, bool) {
        let (u, v) = self.split(node);
        (u >> (self.w - 1) & 1 == 1, v >> (self.w - 1) & 1 == 1)
    }

    fn witness(&self, start: u32, backward: &[bool], forward: &[bool]) -> Witness {
        // Walk into the past until a node repeats.
        let mut back = vec![start];
        let (left_cycle, to_start) = loop {
            let last = *back.last().unwrap();
            let prev = self
                .predecessors(last)
                .find(|&p| backward[p as usize])
                .expect("node with infinite past has a surviving predecessor");
            if let Some(j) = back.iter().position(|&b| b == prev) {
                // back[j] -> back[m-1] -> ... -> back[j+1] -> back[j] is a cycle.
                let cycle: Vec<u32> = back[j..].iter().rev().copied().collect();
                let path: Vec<u32> = back[..j].iter().rev().copied().collect();
                break (cycle, path);
            }
            back.push(prev);
        };
        let mut fwd = vec![start];
        let (from_start, right_cycle) = loop {
            let last = *fwd.last().unwrap();
            let next = self
                .successors(last)
                .find(|&s| forward[s as usize])
                .expect("node with infinite future has a surviving successor");
            if let Some(j) = fwd.iter().position(|&f| f == next) {
                let path: Vec<u32> = fwd[1..=j].to_vec();
                let mut cycle: Vec<u32> = fwd[j + 1..].to_vec();
                cycle.push(next);
                break (path, cycle);
            }
            fwd.push(next);
        };
        let render = |nodes: &[u32]| -> (String, String) {
            let (xs, ys): (Vec<bool>, Vec<bool>) =
                nodes.iter().map(|&n| self.entry_bits(n)).unzip();
            (bits_to_string(&xs), bits_to_string(&ys))
        };
        let middle: Vec<u32> = to_start.iter().chain(&from_start).copied().collect();
        let (left_x, left_y) = render(&left_cycle);
        let (middle_x, middle_y) = render(&middle);
        let (right_x, right_y) = render(&right_cycle);
        Witness::Pair {
            left_x,
            middle_x,
            right_x,
            left_y,
            middle_y,
            right_y,
        }
    }
}

/// The rule of `G ∘ F` (f applied first), normalized with accumulated shift.
pub fn compose(g: &Rule, f: &Rule) -> Result<Rule> {
    let kf = f.k();
    let kg = g.k();
    let raw = kf + kg - 1;
    if raw > MAX_ARITY {
        return Err(Error::Arity {
            k: raw,
            max: MAX_ARITY,
        });
    }
    let fmask = (1u64 << kf) - 1;
    let total = 1u64 << raw;
    let words: Vec<u64> = (0..words_for(raw))
        .into_par_iter()
        .map(|j| {
            let base = (j as u64) << 6;
            let mut word = 0u64;
            for b in 0..64u64 {
                let x = base + b;
                if x >= total {
                    break;
                }
                let mut y = 0u64;
                for t in 0..kg {
                    if f.eval((x >> t) & fmask) {
                        y |= 1 << t;
                    }
                }
                if g.eval(y) {
                    word |= 1 << b;
                }
            }
            word
        })
        .collect();
    Rule::from_words(raw, words, f.shift() + g.shift())
}

/// `f_s(x_1, ..., x_{(k-1)s+1}) = f(x_1, x_{s+1}, ..., x_{(k-1)s+1})`.
pub fn expand(f: &Rule, stride: u32) -> Result<Rule> {
    if stride <= 1 {
        return Ok(f.clone());
    }
    let k = f.k();
    let wide = (k - 1) * stride + 1;
    if wide > MAX_ARITY {
        return Err(Error::Arity {
            k: wide,
            max: MAX_ARITY,
        });
    }
    let rule = Rule::from_fn(wide, |v| {
        let gathered = (0..k).fold(0u64, |acc, i| acc | ((v >> (i * stride) & 1) << i));
        f.eval(gathered)
    })?;
    Ok(rule.with_shift(f.shift() * i64::from(stride)))
}

/// Outcome of searching for the order of a rule's automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum IterateOrder {
    /// `F^order` is the pure shift by `offset` cells (0 means the identity
    /// under the rule's placement).
    Found { order: u32, offset: i64 },
    /// No power up to the bound is a pure shift.
    NotWithin { max_power: u32 },
    /// The composed arity overflowed before a conclusion at this power.
    Unknown { power: u32 },
}

/// Smallest `m <= max_power` such that `F^m` is a pure shift.
pub fn iterate_order(rule: &Rule, max_power: u32) -> IterateOrder {
    let mut power = rule.clone();
    for m in 1..=max_power {
        if m > 1 {
            power = match compose(rule, &power) {
                Ok(p) => p,
                Err(_) => return IterateOrder::Unknown { power: m },
            };
        }
        if power.is_projection() {
            return IterateOrder::Found {
                order: m,
                offset: power.shift(),
            };
        }
    }
    IterateOrder::NotWithin { max_power }
}

/// `F^(2^e)` by repeated squaring, normalized.
pub fn power_of_two(rule: &Rule, e: u32) -> Result<Rule> {
    let mut p = rule.clone();
    for _ in 0..e {
        if p.is_projection() {
            // A shift squared stays a shift; only the placement moves.
            let s = p.shift();
            p = p.with_shift(2 * s);
            continue;
        }
        p = compose(&p, &p)?;
    }
    Ok(p)
}

/// Checks `is_lifting(n) => is_lifting(m)` for a divisor `m >= k` of `n`.
pub fn divisor_check(rule: &Rule, n: u32, m: u32) -> Result<bool> {
    if m < rule.k() || m == 0 || !n.is_multiple_of(m) {
        return Err(Error::Divisor { n, m, k: rule.k() });
    }
    Ok(!is_lifting(rule, n)? || is_lifting(rule, m)?)
}
