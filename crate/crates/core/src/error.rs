use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the compilers and the data model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid alphabet: s={s}, n={n} (need s >= 2 and n >= 1)")]
    InvalidAlphabet { s: usize, n: usize },
    #[error("s^n overflows the index width for s={s}, n={n}")]
    IndexOverflow { s: usize, n: usize },
    #[error("index {index} out of range for an index space of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("alphabets do not match")]
    AlphabetMismatch,
    #[error("mapping is not bijective")]
    NotBijective,
    #[error("operation requires s = 2, got s = {0}")]
    NotBoolean(usize),
    #[error("cycle length {k} out of range for arity {n}")]
    CycleOutOfRange { k: usize, n: usize },
    #[error("signature cannot be grouped into registers of width {0}")]
    SignatureNotGroupable(usize),
    #[error("graph is not {0}-regular")]
    NotRegular(usize),
    #[error("part sizes sum to {got}, expected {expected}")]
    SizesDoNotSum { got: usize, expected: usize },
    #[error("non-empty part at position {0} has no target vector")]
    TooManyParts(usize),
    #[error("mapping is not distance-compatible")]
    NotDistanceCompatible,
    #[error("mapping does not strictly preserve order on the given range")]
    NotOrderPreserving,
    #[error("invalid class ordering: {0}")]
    InvalidOrdering(String),
    #[error("sequence length {0} is not a power of two")]
    BadLength(usize),
    #[error("values sum to {got}, expected {expected}")]
    BadSum { got: u64, expected: u64 },
    #[error("block-tree choice vector has length {got}, expected {expected}")]
    BadChoice { got: usize, expected: usize },
    #[error("mapping is not suffix-compatible")]
    NotSuffixCompatible,
    #[error("unexpected signature: {0}")]
    BadSignature(String),
    #[error("every residue is zero")]
    ZeroColumn,
    #[error("invalid modulus {0}")]
    InvalidModulus(u64),
    #[error("factor {0} has a non-unit diagonal coefficient")]
    NotInvertible(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("search budget exceeded after {0} states")]
    BudgetExceeded(usize),
    #[error("no program of length <= {0} found")]
    NotFound(usize),
}
