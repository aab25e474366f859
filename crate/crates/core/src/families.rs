//! Two parametric families of proper liftings of arbitrary diameter.
//!
//! Symmetric family, for a symmetric set `S ⊆ {1..k}`:
//! `f(x) = x_j ⊕ (x_{k+1-j} ⊕ 1) ∏_{l∈S} x_l`, whose automaton satisfies
//! `F^(2^r) = I`.
//!
//! Chain family, on `2r` variables:
//! `f(x) = x_r ⊕ Σ_{j=1}^{r-1} (x_j⊕1)(x_{r+j+1}⊕1) ∏_{m=1}^{j} x_{r+m} ·
//! (∏_{m=j+1}^{r} (x_m⊕1) ⊕ ∏_{m=j+1}^{r} x_m)`, whose automaton has `F^r = I`.
//!
//! Both rules are placed so that the distinguished variable sits on the cell
//! being updated.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lifting::{compose, power_of_two};
use crate::rule::{Rule, MAX_ARITY};

/// The clause a rejected parameter set violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamViolation {
    Diameter {
        k: u32,
    },
    Position {
        j: u32,
        k: u32,
    },
    /// `j` is the middle position, so `Ξ = k + 1 - 2j = 0`.
    Central {
        j: u32,
    },
    OutOfRange {
        l: u32,
        k: u32,
    },
    Asymmetric {
        l: u32,
        mirror: u32,
    },
    MissingOne,
    ContainsJ {
        j: u32,
    },
    NoResidue {
        j: u32,
        xi: u32,
    },
    ChainLength {
        r: u32,
    },
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamViolation::Diameter { k } => write!(f, "k={k} must be at least 4"),
            ParamViolation::Position { j, k } => write!(f, "j={j} must lie in 2..={}", k - 1),
            ParamViolation::Central { j } => write!(f, "j={j} is the central position (Ξ = 0)"),
            ParamViolation::OutOfRange { l, k } => write!(f, "{l} is not in 1..={k}"),
            ParamViolation::Asymmetric { l, mirror } => {
                write!(f, "S is not symmetric: {l} ∈ S but {mirror} ∉ S")
            }
            ParamViolation::MissingOne => write!(f, "1 ∉ S"),
            ParamViolation::ContainsJ { j } => write!(f, "j={j} ∈ S"),
            ParamViolation::NoResidue { j, xi } => {
                write!(f, "no t ∈ S with t ≡ {j} (mod {xi})")
            }
            ParamViolation::ChainLength { r } => {
                write!(f, "r={r} must lie in 2..={}", MAX_ARITY / 2)
            }
        }
    }
}

fn invalid(v: ParamViolation) -> Error {
    Error::FamilyParams(v)
}

/// Validated parameters of the symmetric family.
///
/// `j > k/2` is accepted as the mirror image of `k + 1 - j`; the formula is
/// unchanged under reversal because `S` is symmetric.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetricFamilyParams {
    pub k: u32,
    pub j: u32,
    pub set: BTreeSet<u32>,
    /// `|k + 1 - 2j|`.
    pub xi: u32,
    /// Smallest `t ∈ S` beyond the (mirrored) `j` with `t ≡ j (mod Ξ)`.
    pub t: u32,
    /// `⌈log2((t - j)/Ξ + 1)⌉`: the automaton satisfies `F^(2^r_exp) = I`.
    pub r_exp: u32,
}

impl SymmetricFamilyParams {
    pub fn new(k: u32, j: u32, set: impl IntoIterator<Item = u32>) -> Result<Self> {
        let set: BTreeSet<u32> = set.into_iter().collect();
        if !(4..=MAX_ARITY).contains(&k) {
            return Err(invalid(ParamViolation::Diameter { k }));
        }
        if !(2..k).contains(&j) {
            return Err(invalid(ParamViolation::Position { j, k }));
        }
        if 2 * j == k + 1 {
            return Err(invalid(ParamViolation::Central { j }));
        }
        for &l in &set {
            if !(1..=k).contains(&l) {
                return Err(invalid(ParamViolation::OutOfRange { l, k }));
            }
            if !set.contains(&(k + 1 - l)) {
                return Err(invalid(ParamViolation::Asymmetric {
                    l,
                    mirror: k + 1 - l,
                }));
            }
        }
        if !set.contains(&1) {
            return Err(invalid(ParamViolation::MissingOne));
        }
        if set.contains(&j) {
            return Err(invalid(ParamViolation::ContainsJ { j }));
        }
        let jj = j.min(k + 1 - j);
        let xi = k + 1 - 2 * jj;
        let t = set
            .iter()
            .copied()
            .find(|&t| t > jj && (t - jj).is_multiple_of(xi))
            .ok_or(invalid(ParamViolation::NoResidue { j, xi }))?;
        let q = (t - jj) / xi;
        let r_exp = (q + 1).next_power_of_two().trailing_zeros();
        Ok(SymmetricFamilyParams {
            k,
            j,
            set,
            xi,
            t,
            r_exp,
        })
    }
}

pub fn build_symmetric(params: &SymmetricFamilyParams) -> Result<Rule> {
    let k = params.k;
    let j = params.j;
    let prod_mask: u64 = params.set.iter().map(|&l| 1u64 << (l - 1)).sum();
    let rule = Rule::from_fn(k, |v| {
        let xj = v >> (j - 1) & 1 == 1;
        let guard = v >> (k - j) & 1 == 0;
        xj ^ (guard && v & prod_mask == prod_mask)
    })?;
    Ok(rule.with_shift(i64::from(j) - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainFamilyParams {
    pub r: u32,
}

impl ChainFamilyParams {
    pub fn new(r: u32) -> Result<Self> {
        if !(2..=MAX_ARITY / 2).contains(&r) {
            return Err(invalid(ParamViolation::ChainLength { r }));
        }
        Ok(ChainFamilyParams { r })
    }
}

pub fn build_chain(params: ChainFamilyParams) -> Result<Rule> {
    let r = params.r;
    let bit = |v: u64, m: u32| v >> (m - 1) & 1 == 1;
    let rule = Rule::from_fn(2 * r, |v| {
        let sum = (1..r).fold(false, |acc, j| {
            let outer = !bit(v, j) && !bit(v, r + j + 1) && (1..=j).all(|m| bit(v, r + m));
            let tail = (j + 1..=r).all(|m| !bit(v, m)) ^ (j + 1..=r).all(|m| bit(v, m));
            acc ^ (outer && tail)
        });
        bit(v, r) ^ sum
    })?;
    Ok(rule.with_shift(i64::from(r) - 1))
}

/// The iterate claimed to be the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderClaim {
    /// `F^(2^e) = I`.
    PowerOfTwo(u32),
    /// `F^m = I`.
    Exact(u32),
}

/// Checks the claim on the placed automaton: the iterate must normalize to
/// the identity with zero offset.
pub fn verify_order_claim(rule: &Rule, claim: OrderClaim) -> Result<bool> {
    let iterate = match claim {
        OrderClaim::PowerOfTwo(e) => power_of_two(rule, e)?,
        OrderClaim::Exact(0) => return Ok(false),
        OrderClaim::Exact(m) => {
            let mut p = rule.clone();
            for _ in 1..m {
                p = compose(rule, &p)?;
            }
            p
        }
    };
    Ok(iterate.is_projection() && iterate.shift() == 0)
}

/// Every valid parameter set of the symmetric family with diameter `k`.
pub fn enumerate_symmetric(k: u32) -> Vec<SymmetricFamilyParams> {
    let half = k.div_ceil(2);
    let mut out = Vec::new();
    for j in 2..k {
        for pairs in 0..1u32 << half {
            let set = (0..half)
                .filter(|&i| pairs >> i & 1 == 1)
                .flat_map(|i| [i + 1, k - i]);
            if let Ok(p) = SymmetricFamilyParams::new(k, j, set) {
                out.push(p);
            }
        }
    }
    out
}
