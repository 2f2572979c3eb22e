use thiserror::Error;

/// Errors raised by the library. Variants carry enough context to be
/// surfaced verbatim by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("rank must be positive")]
    InvalidRank,
    #[error("rank mismatch: expected {expected}, got {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("scales must be strictly increasing and larger than 1 (at position {position})")]
    NonIncreasingScales { position: usize },
    #[error("scale {smaller} does not divide {larger}")]
    NonDividingScales { smaller: i64, larger: i64 },
    #[error("chain condition violated: {0}")]
    ChainConditionViolated(String),
    #[error("level {level} out of range (depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("alphabet must contain at least one letter and no duplicates")]
    InvalidAlphabet,
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("periodic word has {found} letters, expected {expected}")]
    WordLength { expected: usize, found: usize },
    #[error("conflicting assignment at level {level} for representative {rep}")]
    ConflictingAssignment { level: usize, rep: String },
    #[error("exact Per sets are not available for oracle configurations")]
    InexactVariant,
    #[error("configurations use different subgroup chains")]
    ChainMismatch,
    #[error("membership is unknown at {0}")]
    UnknownMembership(String),
    #[error("joint support has {size} atoms, at most {max} supported")]
    SupportTooLarge { size: usize, max: usize },
    #[error("sampled system has {size} points, at most {max} supported")]
    SystemTooLarge { size: usize, max: usize },
    #[error("delta must satisfy 0 < delta < 1/4, got {0}")]
    DeltaOutOfRange(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("not a {k}-cover: element {element} is covered {count} times")]
    NotAKCover { k: usize, element: String, count: usize },
    #[error("configuration has unresolved cells on F_{level}")]
    UnresolvedCells { level: usize },
    #[error("inconsistent cylinders at level {level} for representative {rep}")]
    InconsistentCylinders { level: usize, rep: String },
    #[error("chain too shallow: {0}")]
    ChainTooShallow(String),
    #[error("unknown oracle rule `{0}`")]
    UnknownRule(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
