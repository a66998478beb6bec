use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1, got {0}")]
    InvalidExtension(u32),
    #[error("field order {p}^{s} exceeds the safe index bound {bound}")]
    FieldTooLarge { p: u64, s: u32, bound: u64 },
    #[error("field element index {x} is outside [0, {q})")]
    ElementOutOfRange { x: u64, q: u64 },
    #[error("polynomial index {index} exceeds the safe index bound {bound}")]
    IndexOverflow { index: u128, bound: u64 },
    #[error("target index 0 is degenerate (deg p_0 = -inf)")]
    DegenerateTarget,
    #[error("sequence covers indices up to {max_index}, but {needed} is required")]
    SequenceTooShort { needed: u64, max_index: u64 },
    #[error("index {index} is outside the sequence bound [0, {max_index}]")]
    IndexOutOfBounds { index: u64, max_index: u64 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("operation requires a {expected} schedule")]
    WrongScheduleKind { expected: &'static str },
    #[error("degree {d} is out of range (at most {max})")]
    DegreeOutOfRange { d: usize, max: usize },
    #[error("tail bound unavailable: {0}")]
    TailPrecondition(&'static str),
    #[error("experiment too large: {0}")]
    Infeasible(String),
    #[error("malformed sequence file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
