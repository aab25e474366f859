//! Proper liftings: Boolean local rules whose induced shift-invariant maps are
//! bijective on every circular length, i.e. local rules of reversible
//! one-dimensional cellular automata.
//!
//! Modules follow the workflow: build rules ([`rule`], [`landscape`],
//! [`expr`], [`families`]), decide and compose them ([`lifting`]), search the
//! diameter-6 involutions exhaustively ([`search6`]), measure differential
//! uniformity ([`diffunif`]), and check the bundled catalog ([`catalog`]).

pub mod catalog;
pub mod diffunif;
pub mod error;
pub mod expr;
pub mod families;
pub mod landscape;
pub mod lifting;
mod poly;
pub mod rule;
pub mod search6;

pub use error::{Error, Result};
pub use expr::LiftExpr;

pub use landscape::{Landscape, LandscapeSet};
pub use lifting::{
    compose, decide_proper, expand, induce, is_lifting, InducedMap, PropernessVerdict,
};
pub use rule::{Anf, EquivClassId, Rule};
