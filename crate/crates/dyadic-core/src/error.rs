use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DyadicError {
    #[error("interval index {index} out of range at depth {depth}")]
    IndexOutOfRange { depth: u32, index: u64 },
    #[error("expected {expected} values for depth {depth}, got {got}")]
    LengthMismatch {
        depth: u32,
        expected: usize,
        got: usize,
    },
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(u32, u32),
    #[error("depth {0} exceeds the supported maximum")]
    DepthTooLarge(u32),
    #[error("multiplier {value} at ({depth},{index}) outside [-1, 1]")]
    MultiplierOutOfRange { depth: u32, index: u64, value: f64 },
    #[error("negative weight value {0}")]
    NegativeWeight(f64),
    #[error("point {0} outside [0, 1)")]
    PointOutOfRange(f64),
    #[error("non-finite value")]
    NonFinite,
    #[error("malformed document: {0}")]
    Format(String),
}
