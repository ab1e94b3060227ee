use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("window [{m}, {n}] invalid for path of length {len}")]
    InvalidWindow { m: usize, n: usize, len: usize },
    #[error("increment {index} has norm {norm} exceeding jump bound {bound}")]
    JumpBound { index: usize, norm: f64, bound: f64 },
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("time {0} is not on the lift grid")]
    OffGrid(f64),
    #[error("empty grid")]
    EmptyGrid,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("alpha must be positive")]
    NonPositiveAlpha,
    #[error("direction must be a unit vector (norm {0})")]
    NonUnitDirection(f64),
    #[error("empty path")]
    EmptyPath,
    #[error("decomposition does not match path ({0})")]
    MismatchedDecomposition(String),
    #[error("insufficient blocks: need {needed}, got {got}")]
    InsufficientBlocks { needed: usize, got: usize },
    #[error("insufficient replicas: need {needed}, got {got}")]
    InsufficientReplicas { needed: usize, got: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
