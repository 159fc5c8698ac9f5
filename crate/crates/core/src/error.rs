use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to
/// locate the offending input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch at atom {atom}: expected block length {expected}, found {found}")]
    BlockShape { atom: usize, expected: usize, found: usize },

    #[error("atom count mismatch: element has {found} blocks, space has {expected} atoms")]
    AtomCount { expected: usize, found: usize },

    #[error("invalid measure space: {0}")]
    Measure(String),

    #[error("invalid Hilbert collection: {0}")]
    Collection(String),

    #[error("empty system")]
    EmptySystem,

    #[error("invalid system spec: {0}")]
    SystemSpec(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("length mismatch: need {needed} coefficients, have {have}")]
    Length { needed: usize, have: usize },

    #[error("dyadic decomposition requires 1 <= j <= 2^r, got j = {j}, r = {r}")]
    DyadicRange { j: u64, r: u32 },

    #[error("N = {0} is not of the form 2^(K+1) - 1; zero-pad the coefficients to the next such length")]
    NotDyadicComplete(usize),

    #[error("invalid permutation: {0}")]
    Permutation(String),

    #[error("no Tandori block intersects support (truncation {0} < 3)")]
    NoTandoriBlock(u64),

    #[error("truncation {0} exceeds the supported maximum 2^32")]
    TruncationTooLarge(u64),

    #[error("invalid sequence: {0}")]
    Sequence(String),

    #[error("weight contract violated: {0}")]
    Weight(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
