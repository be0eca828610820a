use alloc::string::String;

use crate::symbolic::Word;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("degree {0} is not supported (expected 2..=36)")]
    InvalidDegree(u32),
    #[error("symbol {symbol} is out of range for degree {degree}")]
    SymbolOutOfRange { symbol: u32, degree: u32 },
    #[error("level {level} exceeds the representable maximum {max}")]
    LevelTooDeep { level: u32, max: u32 },
    #[error("index {index} is out of range at level {level}")]
    IndexOutOfRange { level: u32, index: u64 },
    #[error("cannot parse word {0:?}")]
    ParseWord(String),
    #[error("words of degree {left} and {right} cannot be mixed")]
    DegreeMismatch { left: u32, right: u32 },
    #[error("transition matrix row {0} has no admissible successor")]
    EmptyRow(usize),
    #[error("word {0} is not admissible")]
    NotAdmissible(Word),
    #[error("vertex budget exceeded: {requested} vertices requested, budget is {budget}")]
    Budget { requested: u64, budget: u64 },
    #[error("vertex {0} is not in the graph")]
    NotInGraph(Word),
    #[error("vertices {0} and {1} are disconnected in the truncated graph")]
    Disconnected(Word, Word),
    #[error("parameter x = {0} must lie strictly between 0 and 1")]
    ParameterOutOfRange(String),
    #[error("outgoing probabilities at {vertex} sum to {sum}, expected 1")]
    RowSum { vertex: Word, sum: String },
    #[error("probability {probability} at {vertex} is not in (0, 1]")]
    BadProbability { vertex: Word, probability: String },
    #[error("transition {from} -> {to} does not increase the level")]
    NonIncreasing { from: Word, to: Word },
    #[error("table has no outgoing distribution for {0}")]
    MissingRow(Word),
    #[error("table lists source {vertex} above the base level {base_level}")]
    AboveBase { vertex: Word, base_level: u32 },
    #[error("base window violates shift equivariance at {vertex}: {detail}")]
    InconsistentBase { vertex: Word, detail: String },
    #[error("lift of target {target} from {from} is ambiguous")]
    LiftAmbiguity { from: Word, target: Word },
    #[error("common probability denominator does not fit in 64 bits")]
    DenominatorOverflow,
    #[error("kernel is only defined up to level {max_level}, requested {level}")]
    BeyondTable { level: u32, max_level: u32 },
    #[error("target {0} lies outside the shadow of the root")]
    OutsideRootShadow(Word),
    #[error("insufficient depth: need level {needed}, have {available}")]
    InsufficientDepth { needed: u32, available: u32 },
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
