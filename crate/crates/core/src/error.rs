use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("truth table has {got} entries, expected 2^{k} = {expected}")]
    TableLength { k: u32, got: usize, expected: usize },

    #[error("arity {k} outside supported range 1..={max}")]
    Arity { k: u32, max: u32 },

    #[error("constant rule has no diameter")]
    ConstantRule,

    #[error("circular length {n} is smaller than the diameter {k}")]
    LengthBelowDiameter { n: u32, k: u32 },

    #[error("circular length {n} exceeds the configured cap {cap}")]
    LengthCap { n: u32, cap: u32 },

    #[error("malformed rule literal {0:?}, expected \"k:HEX\"")]
    RuleLiteral(String),

    #[error("invalid landscape {text:?}: {reason}")]
    Landscape { text: String, reason: String },

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("empty landscape set")]
    EmptySet,

    #[error("invalid family parameters: {0}")]
    FamilyParams(crate::families::ParamViolation),

    #[error("{m} does not satisfy k <= m and m | n for n={n}, k={k}")]
    Divisor { n: u32, m: u32, k: u32 },

    #[error("catalog: {0}")]
    Catalog(String),

    #[error("offset {s} outside 1..=6")]
    Offset { s: u32 },
}
