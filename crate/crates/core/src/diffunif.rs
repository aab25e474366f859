//! Differential uniformity of induced circular maps.
//!
//! `DU(F) = max_{a≠0, b} #{x : F(x⊕a) ⊕ F(x) = b}`. Rotating `a` rotates the
//! whole DDT row, so only necklace representatives of `a` are scanned. Values
//! are also reported at the common scale `2^(9-n)·DU(F)`, kept exact as a
//! numerator over a power of two.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::LiftExpr;
use crate::lifting::{rotate_right, InducedMap};
use crate::rule::Rule;

/// Default cap on `n` for DDT scans.
pub const DU_N_CAP: u32 = 14;

/// A non-negative dyadic rational `numerator / 2^log2_den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scaled {
    numerator: u64,
    log2_den: u32,
}

impl Scaled {
    /// `2^(9-n) · raw`.
    pub fn at_scale(raw: u64, n: u32) -> Scaled {
        if n <= 9 {
            Scaled {
                numerator: raw << (9 - n),
                log2_den: 0,
            }
        } else {
            let mut s = Scaled {
                numerator: raw,
                log2_den: n - 9,
            };
            while s.log2_den > 0 && s.numerator.is_multiple_of(2) {
                s.numerator /= 2;
                s.log2_den -= 1;
            }
            s
        }
    }

    pub fn integer(v: u64) -> Scaled {
        Scaled {
            numerator: v,
            log2_den: 0,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn log2_den(&self) -> u32 {
        self.log2_den
    }

    pub fn is_integer(&self) -> bool {
        self.log2_den == 0
    }
}

impl Ord for Scaled {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.log2_den.max(other.log2_den);
        let a = u128::from(self.numerator) << (d - self.log2_den);
        let b = u128::from(other.numerator) << (d - other.log2_den);
        a.cmp(&b)
    }
}

impl PartialOrd for Scaled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Scaled {
    /// Exact decimal: every dyadic rational has a terminating expansion.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.log2_den;
        let int = self.numerator >> d;
        if d == 0 {
            return write!(f, "{int}");
        }
        let frac = u128::from(self.numerator & ((1u64 << d) - 1)) * 5u128.pow(d);
        write!(f, "{int}.{frac:0width$}", width = d as usize)
    }
}

impl Serialize for Scaled {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuEntry {
    pub n: u32,
    pub du_raw: u64,
    pub du_scaled: Scaled,
    /// An input/output difference pair attaining the maximum.
    pub witness: (u64, u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuReport {
    pub rule: String,
    pub entries: Vec<DuEntry>,
    /// Largest `2^(9-n)·DU` over the range, i.e. `2^9 · max 2^(-n) DU`.
    pub max_scaled: Scaled,
    /// Whether `2^(-n)·DU` is constant over the last three lengths.
    pub stabilized: bool,
}

fn necklace_representatives(n: u32) -> Vec<u64> {
    (1..1u64 << n)
        .filter(|&a| (1..n).all(|c| rotate_right(a, c, n) >= a))
        .collect()
}

/// Maximum DDT entry over `a ≠ 0` together with an attaining `(a, b)`.
pub fn ddt_max(rule: &Rule, n: u32) -> Result<(u64, (u64, u64))> {
    ddt_max_capped(rule, n, DU_N_CAP)
}

pub fn ddt_max_capped(rule: &Rule, n: u32, cap: u32) -> Result<(u64, (u64, u64))> {
    if n > cap {
        return Err(Error::LengthCap { n, cap });
    }
    let table = InducedMap::new(rule, n)?.materialize();
    let best = necklace_representatives(n)
        .into_par_iter()
        .map(|a| row_max(&table, a as u32))
        .reduce(
            || (0, (u64::MAX, 0)),
            |p, q| match p.0.cmp(&q.0) {
                Ordering::Greater => p,
                Ordering::Less => q,
                Ordering::Equal => {
                    if p.1 <= q.1 {
                        p
                    } else {
                        q
                    }
                }
            },
        );
    Ok(best)
}

fn row_max(table: &[u32], a: u32) -> (u64, (u64, u64)) {
    let mut counts = vec![0u32; table.len()];
    for (x, &y) in table.iter().enumerate() {
        counts[(table[x ^ a as usize] ^ y) as usize] += 1;
    }
    let (b, &c) = counts
        .iter()
        .enumerate()
        .max_by(|p, q| p.1.cmp(q.1).then_with(|| q.0.cmp(&p.0)))
        .expect("nonempty");
    (u64::from(c), (u64::from(a), b as u64))
}

/// DU for every `n` in the range (lengths below the diameter are skipped).
pub fn du_profile(rule: &Rule, n_from: u32, n_to: u32) -> Result<DuReport> {
    let mut entries = Vec::new();
    for n in n_from.max(rule.k())..=n_to {
        let (du_raw, witness) = ddt_max(rule, n)?;
        entries.push(DuEntry {
            n,
            du_raw,
            du_scaled: Scaled::at_scale(du_raw, n),
            witness,
        });
    }
    let max_scaled = entries
        .iter()
        .map(|e| e.du_scaled)
        .max()
        .unwrap_or(Scaled::integer(0));
    let stabilized = entries.len() >= 3
        && entries[entries.len() - 3..]
            .windows(2)
            .all(|w| w[0].du_scaled == w[1].du_scaled);
    Ok(DuReport {
        rule: rule.to_string(),
        entries,
        max_scaled,
        stabilized,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuTableRow {
    pub function: String,
    pub k: u32,
    pub degree: u32,
    /// One value per `n` in the table range; `None` where `n < k`.
    pub values: Vec<Option<Scaled>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuTable {
    pub n_from: u32,
    pub n_to: u32,
    pub rows: Vec<DuTableRow>,
}

/// Scaled DU values `2^(9-n)·DU(F)` laid out one row per expression.
pub fn du_scaled_table(rows: &[LiftExpr], n_from: u32, n_to: u32) -> Result<DuTable> {
    let rows = rows
        .iter()
        .map(|e| {
            let rule = e.eval()?;
            let report = du_profile(&rule, n_from, n_to)?;
            let values = (n_from..=n_to)
                .map(|n| {
                    report
                        .entries
                        .iter()
                        .find(|en| en.n == n)
                        .map(|en| en.du_scaled)
                })
                .collect();
            Ok(DuTableRow {
                function: e.to_string(),
                k: rule.k(),
                degree: rule.degree(),
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DuTable { n_from, n_to, rows })
}

impl DuTable {
    fn cells(&self, row: &DuTableRow) -> Vec<String> {
        let mut cells = vec![
            row.function.clone(),
            row.k.to_string(),
            row.degree.to_string(),
        ];
        cells.extend(
            row.values
                .iter()
                .map(|v| v.map_or_else(|| "-".to_string(), |s| s.to_string())),
        );
        cells
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["Function".to_string(), "k".to_string(), "deg".to_string()];
        h.extend((self.n_from..=self.n_to).map(|n| format!("n={n}")));
        h
    }

    pub fn to_csv(&self) -> String {
        let quote = |s: &str| {
            if s.contains(',') || s.contains('"') {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        };
        let mut out = String::new();
        for line in std::iter::once(self.header()).chain(self.rows.iter().map(|r| self.cells(r))) {
            let fields: Vec<String> = line.iter().map(|c| quote(c)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let lines: Vec<Vec<String>> = std::iter::once(self.header())
            .chain(self.rows.iter().map(|r| self.cells(r)))
            .collect();
        let cols = lines[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                lines
                    .iter()
                    .map(|l| l[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for l in &lines {
            let row: Vec<String> = l
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    let pad = widths[c] - cell.chars().count();
                    if c == 0 {
                        format!("{cell}{}", " ".repeat(pad))
                    } else {
                        format!("{}{cell}", " ".repeat(pad))
                    }
                })
                .collect();
            out.push_str(row.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
