//! The bundled catalog of 120 diameter-6 proper liftings, its verifier, the
//! generator closure search, and the degree-2 composition probe.
//!
//! Catalog file format, one entry per line:
//! `expr <TAB> degree <TAB> du6,...,du12 [<TAB> highlight]`, with `-` for an
//! absent DU column.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::diffunif::ddt_max;
use crate::error::{Error, Result};
use crate::expr::LiftExpr;
use crate::landscape::{enumerate_conserved, Landscape, LandscapeSet};
use crate::lifting::{compose, decide_proper};
use crate::rule::{essential_span, words_for, EquivClassId, Rule};

pub const CATALOG_TSV: &str = include_str!("../data/catalog.tsv");
pub const CATALOG_SIZE: usize = 120;
/// The DU columns cover `n = 6..=12`.
pub const DU_RANGE: std::ops::RangeInclusive<u32> = 6..=12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    #[serde(serialize_with = "display")]
    pub expr: LiftExpr,
    pub stated_degree: u32,
    pub stated_du: Option<[u64; 7]>,
    pub highlight: bool,
}

fn display<T: std::fmt::Display, S: serde::Serializer>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn parse_catalog(text: &str) -> Result<Vec<CatalogEntry>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = |why: &str| Error::Catalog(format!("line {}: {why}", i + 1));
            let fields: Vec<&str> = line.split('\t').collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(bad("expected 3 or 4 tab-separated fields"));
            }
            let expr = LiftExpr::parse(fields[0]).map_err(|e| bad(&e.to_string()))?;
            let stated_degree = fields[1].parse().map_err(|_| bad("bad degree"))?;
            let stated_du = match fields[2] {
                "-" => None,
                du => {
                    let values: Vec<u64> = du
                        .split(',')
                        .map(|v| v.trim().parse())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("bad DU value"))?;
                    Some(values.try_into().map_err(|_| bad("expected 7 DU values"))?)
                }
            };
            let highlight = match fields.get(3) {
                None => false,
                Some(&"highlight") => true,
                Some(_) => return Err(bad("unknown flag")),
            };
            Ok(CatalogEntry {
                expr,
                stated_degree,
                stated_du,
                highlight,
            })
        })
        .collect()
}

/// The bundled catalog, checked for size and per-degree counts.
pub fn load_catalog() -> Result<Vec<CatalogEntry>> {
    let entries = parse_catalog(CATALOG_TSV)?;
    if entries.len() != CATALOG_SIZE {
        return Err(Error::Catalog(format!(
            "{} entries, expected {CATALOG_SIZE}",
            entries.len()
        )));
    }
    let by_degree = degree_histogram(&entries);
    let expected = BTreeMap::from([(3, 1), (4, 42), (5, 77)]);
    if by_degree != expected {
        return Err(Error::Catalog(format!("degree counts {by_degree:?}")));
    }
    Ok(entries)
}

pub fn degree_histogram(entries: &[CatalogEntry]) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for e in entries {
        *h.entry(e.stated_degree).or_insert(0) += 1;
    }
    h
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Compare DU for `n = 6..=du_n_max` against the stated values.
    pub du_n_max: Option<u32>,
    /// Classes that must all occur in the catalog.
    pub required_classes: Vec<EquivClassId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub index: usize,
    pub expr: String,
    pub field: String,
    pub stated: String,
    pub computed: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryCheck {
    pub index: usize,
    pub expr: String,
    pub rule: String,
    #[serde(serialize_with = "display")]
    pub class: EquivClassId,
    pub k: u32,
    pub degree: u32,
    pub proper: bool,
    pub balanced: bool,
    pub du: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub entries: Vec<EntryCheck>,
    pub distinct_classes: usize,
    pub orbit_functions: usize,
    pub missing_required: Vec<String>,
    pub mismatches: Vec<Mismatch>,
}

impl CatalogReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.missing_required.is_empty()
    }
}

fn check_entry(
    index: usize,
    e: &CatalogEntry,
    opts: &VerifyOptions,
) -> Result<(EntryCheck, Vec<Mismatch>)> {
    let rule = e.expr.eval()?;
    let degree = rule.degree();
    let proper = decide_proper(&rule)?.is_proper();
    let du = match opts.du_n_max {
        Some(max) => (*DU_RANGE.start()..=max.min(*DU_RANGE.end()))
            .map(|n| ddt_max(&rule, n).map(|(d, _)| d))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let mut bad = Vec::new();
    let mut mismatch = |field: &str, stated: String, computed: String| {
        bad.push(Mismatch {
            index,
            expr: e.expr.to_string(),
            field: field.to_string(),
            stated,
            computed,
        })
    };
    if rule.k() != 6 {
        mismatch("diameter", "6".into(), rule.k().to_string());
    }
    if degree != e.stated_degree {
        mismatch("degree", e.stated_degree.to_string(), degree.to_string());
    }
    if !proper {
        mismatch("proper", "true".into(), "false".into());
    }
    if let Some(stated) = e.stated_du {
        for (i, &d) in du.iter().enumerate() {
            if d != stated[i] {
                mismatch(
                    &format!("du[n={}]", 6 + i),
                    stated[i].to_string(),
                    d.to_string(),
                );
            }
        }
    }
    Ok((
        EntryCheck {
            index,
            expr: e.expr.to_string(),
            rule: rule.to_string(),
            class: rule.canonicalize(),
            k: rule.k(),
            degree,
            proper,
            balanced: rule.is_balanced(),
            du,
        },
        bad,
    ))
}

/// Structural (and optionally DU) verification of every entry.
pub fn verify_catalog(entries: &[CatalogEntry], opts: &VerifyOptions) -> Result<CatalogReport> {
    let checked = entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| check_entry(i, e, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut mismatches = Vec::new();
    let mut checks = Vec::new();
    for (c, m) in checked {
        checks.push(c);
        mismatches.extend(m);
    }
    let mut first_seen: HashMap<&EquivClassId, usize> = HashMap::new();
    for c in &checks {
        if let Some(&prev) = first_seen.get(&c.class) {
            mismatches.push(Mismatch {
                index: c.index,
                expr: c.expr.clone(),
                field: "class".into(),
                stated: "distinct".into(),
                computed: format!("equivalent to entry {prev}"),
            });
        } else {
            first_seen.insert(&c.class, c.index);
        }
    }
    let classes: BTreeSet<EquivClassId> = checks.iter().map(|c| c.class.clone()).collect();
    let missing_required = opts
        .required_classes
        .iter()
        .filter(|c| !classes.contains(c))
        .map(|c| c.to_string())
        .collect();
    Ok(CatalogReport {
        distinct_classes: classes.len(),
        orbit_functions: orbit_size(classes.iter()),
        entries: checks,
        missing_required,
        mismatches,
    })
}

/// Number of distinct rules in the union of the classes' orbits.
pub fn orbit_size<'a>(classes: impl Iterator<Item = &'a EquivClassId>) -> usize {
    classes.map(|c| c.representative().orbit().len()).sum()
}

/// Every rule in the orbits of the catalog entries.
pub fn orbit_expansion(entries: &[CatalogEntry]) -> Result<Vec<Rule>> {
    let mut out = Vec::new();
    for e in entries {
        out.extend(e.expr.eval()?.orbit());
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

/// Known correspondences between polynomials, landscapes, compositions and
/// landscape sets.
pub fn identities() -> Result<Vec<IdentityCheck>> {
    let poly_vs_expr = [
        ("x2 ^ x1 (x3 ^ 1) x4", "1★01"),
        ("x2 ^ x1 x3 (x4 ^ 1) (x5 ^ 1)", "1★100"),
        ("x2 ^ x1 (x3 ^ 1) (x4 ^ 1) x5", "1★001"),
        (
            "x2 ^ x1 (x4 (x3 ^ 1) ^ (x4 ^ 1) x5 (x2 ^ x3 ^ 1))",
            "(1★001)∘(1★01)",
        ),
        ("x3 ^ x1 x2 (x4 ^ 1) x5", "11★01"),
        ("x3 ^ x1 (x2 ^ 1) x4 (x5 ^ 1)", "10★10"),
    ];
    let mut out = Vec::new();
    for (poly, expr) in poly_vs_expr {
        let lhs = Rule::parse_polynomial(poly)?;
        let rhs = LiftExpr::parse(expr)?.eval()?;
        out.push(IdentityCheck {
            name: "polynomial = landscape form".into(),
            lhs: poly.into(),
            rhs: expr.into(),
            holds: lhs == rhs,
        });
    }
    let sets: [(&[&str], &str); 2] = [
        (&["0★110", "10★10"], "(0★110)∘(10★10)"),
        (
            &["0★10", "0--★10", "0----★10"],
            "(0-1-1★10)∘(0-1★10)∘(0★10)",
        ),
    ];
    for (members, expr) in sets {
        let set = LandscapeSet::new(
            members
                .iter()
                .map(|m| Landscape::parse(m))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let lhs = set.compile()?;
        let rhs = LiftExpr::parse(expr)?.eval()?;
        out.push(IdentityCheck {
            name: "landscape set = composition".into(),
            lhs: members.join(" ∨ "),
            rhs: expr.into(),
            holds: lhs == rhs && lhs.shift() == rhs.shift(),
        });
    }
    Ok(out)
}

/// Conserved landscapes of diameter at most six, compiled (orbit-closed).
pub fn closure_generators() -> Result<Vec<Rule>> {
    let mut out = Vec::new();
    for k in 4..=6 {
        let census = enumerate_conserved(k)?;
        out.extend(
            census
                .landscapes
                .unwrap_or_default()
                .iter()
                .map(Landscape::compile),
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub max_diameter: u32,
    pub generators: usize,
    /// Distinct classes visited (every diameter up to the cap).
    pub states: usize,
    pub budget_exhausted: bool,
    /// Classes of diameter ≤ 6 and degree ≥ 2 found; a lower bound.
    #[serde(serialize_with = "display_all")]
    pub classes: BTreeSet<EquivClassId>,
    pub diameter6_classes: usize,
    /// Diameter-6 classes whose square is the identity.
    pub involution6_classes: usize,
}

fn display_all<S: serde::Serializer>(
    v: &BTreeSet<EquivClassId>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

/// Packed outputs of `f` on `m` consecutive windows: entry `x`, over
/// `k + m - 1` bits, holds `f` of the window starting at bit `t` in bit `t`.
fn window_outputs(f: &Rule, m: u32) -> Vec<u16> {
    let k = f.k();
    let mask = (1usize << k) - 1;
    let single: Vec<u16> = (0..1u64 << k).map(|x| u16::from(f.eval(x))).collect();
    let mut cur = single.clone();
    for level in 1..m {
        cur = (0..1usize << (k + level))
            .map(|x| single[x & mask] | cur[x >> 1] << 1)
            .collect();
    }
    cur
}

/// A rule prepared for repeated composition inside the closure search.
struct Prepared {
    rule: Rule,
    bits: Vec<bool>,
    /// `outputs[m]`: window outputs for `m` windows, for the widths needed.
    outputs: Vec<Vec<u16>>,
}

impl Prepared {
    fn new(rule: Rule, widths: impl Iterator<Item = u32>) -> Prepared {
        let mut outputs = Vec::new();
        for m in widths {
            if outputs.len() <= m as usize {
                outputs.resize(m as usize + 1, Vec::new());
            }
            outputs[m as usize] = window_outputs(&rule, m);
        }
        Prepared {
            bits: rule.to_bools(),
            rule,
            outputs,
        }
    }
}

/// `g ∘ f` if its diameter is at most `cap` and it is not a pure shift.
fn compose_capped(g: &Prepared, f: &Prepared, cap: u32) -> Option<Rule> {
    let raw = f.rule.k() + g.rule.k() - 1;
    let ys = &f.outputs[g.rule.k() as usize];
    let mut words = vec![0u64; words_for(raw)];
    for (x, &y) in ys.iter().enumerate() {
        if g.bits[y as usize] {
            words[x >> 6] |= 1 << (x & 63);
        }
    }
    let (lo, hi) = essential_span(raw, &words)?;
    if hi - lo + 1 > cap {
        return None;
    }
    let r = Rule::from_words(raw, words, f.rule.shift() + g.rule.shift()).ok()?;
    (!r.is_projection()).then_some(r)
}

/// Breadth-first closure of the generators under composition on either side,
/// keeping intermediates of diameter at most `max_diameter`.
///
/// The closure is built cap by cap (6, 7, …, `max_diameter`), each level
/// re-expanding everything found below it, so the class set only grows with
/// the cap. `budget` bounds the number of stored classes.
///
/// Memoized by class: the generator set is closed under the symmetry group, so
/// composing a class representative covers the whole class.
pub fn closure_search(max_diameter: u32, budget: usize) -> Result<ClosureReport> {
    if !(6..=12).contains(&max_diameter) {
        return Err(Error::Catalog(format!(
            "closure cap {max_diameter} outside 6..=12"
        )));
    }
    let raw_generators = closure_generators()?;
    let generators: Vec<Prepared> = raw_generators
        .iter()
        .map(|g| Prepared::new(g.clone(), 1..=max_diameter))
        .collect();
    let generator_widths: BTreeSet<u32> = raw_generators.iter().map(Rule::k).collect();
    // Ordered so that budget cut-offs do not depend on hashing.
    let mut seen: BTreeMap<EquivClassId, Rule> = BTreeMap::new();
    for g in &raw_generators {
        seen.entry(g.canonicalize()).or_insert_with(|| g.clone());
    }
    let mut budget_exhausted = false;
    for cap in 6..=max_diameter {
        let mut frontier: Vec<Rule> = seen.values().cloned().collect();
        while !frontier.is_empty() && !budget_exhausted {
            let products: Vec<Rule> = frontier
                .par_iter()
                .flat_map_iter(|r| {
                    let state = Prepared::new(r.clone(), generator_widths.iter().copied());
                    generators
                        .iter()
                        .flat_map(|g| {
                            [
                                compose_capped(g, &state, cap),
                                compose_capped(&state, g, cap),
                            ]
                        })
                        .flatten()
                        .collect::<Vec<_>>()
                })
                .collect();
            frontier.clear();
            for p in products {
                let id = p.canonicalize();
                if seen.contains_key(&id) {
                    continue;
                }
                if seen.len() >= budget {
                    budget_exhausted = true;
                    break;
                }
                seen.insert(id, p.clone());
                frontier.push(p);
            }
        }
        if budget_exhausted {
            break;
        }
    }
    let states = seen.len();
    let classes: BTreeSet<EquivClassId> = seen
        .into_iter()
        .filter(|(id, r)| id.k() <= 6 && r.degree() >= 2)
        .map(|(id, _)| id)
        .collect();
    Ok(ClosureReport {
        max_diameter,
        generators: generators.len(),
        states,
        budget_exhausted,
        diameter6_classes: classes.iter().filter(|c| c.k() == 6).count(),
        involution6_classes: classes
            .iter()
            .filter(|c| c.k() == 6 && is_involution(&c.representative()))
            .count(),
        classes,
    })
}

/// Involutive once suitably placed: the square is a pure shift by an even
/// offset, which placing `r` half that offset back cancels.
fn is_involution(r: &Rule) -> bool {
    compose(r, r).is_ok_and(|sq| sq.is_projection() && sq.shift() % 2 == 0)
}

#[derive(Debug, Clone, Serialize)]
pub struct Degree2Report {
    pub universe: String,
    pub universe_size: usize,
    pub pairs: u64,
    /// Resulting degree → number of ordered pairs.
    pub degree_histogram: BTreeMap<u32, u64>,
    pub degree2: Vec<(String, String)>,
}

/// Composes every ordered pair from the orbit-expanded catalog plus the
/// diameter-4/5 conserved landscapes and records resulting degrees.
pub fn degree2_probe(entries: &[CatalogEntry]) -> Result<Degree2Report> {
    let mut universe = orbit_expansion(entries)?;
    for k in 4..=5 {
        universe.extend(
            enumerate_conserved(k)?
                .landscapes
                .unwrap_or_default()
                .iter()
                .map(Landscape::compile),
        );
    }
    let results: Vec<(u32, Option<(String, String)>)> = universe
        .par_iter()
        .flat_map_iter(|g| {
            universe.iter().map(move |f| {
                let d = compose(g, f).map(|c| c.degree()).unwrap_or(0);
                (d, (d == 2).then(|| (g.to_string(), f.to_string())))
            })
        })
        .collect();
    let mut degree_histogram = BTreeMap::new();
    let mut degree2 = Vec::new();
    for (d, hit) in results {
        *degree_histogram.entry(d).or_insert(0) += 1;
        degree2.extend(hit);
    }
    Ok(Degree2Report {
        universe: "proper liftings of diameter ≤ 6: catalog orbits plus conserved landscapes of diameter 4 and 5".into(),
        universe_size: universe.len(),
        pairs: (universe.len() * universe.len()) as u64,
        degree_histogram,
        degree2,
    })
}
