use thiserror::Error;

use crate::zipper::ValidationReport;

/// Errors produced by the zipper algorithms.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("singular linear system (pivot magnitude {pivot:e})")]
    SingularSystem { pivot: f64 },

    #[error("zipper conditions violated:\n{0}")]
    ZipperViolation(Box<ValidationReport>),

    #[error("invalid line-zipper nodes: {0}")]
    InvalidNodes(String),

    #[error("map {index} is not a contraction (factor {factor})")]
    NotContracting { index: usize, factor: f64 },

    #[error("signature mismatch between zipper and line zipper")]
    SignatureMismatch,

    #[error("map count mismatch: {left} vs {right}")]
    CountMismatch { left: usize, right: usize },

    #[error("zipper is not normalized: first vertex has norm {0:e}")]
    NotNormalized(f64),

    #[error("parameter {0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("TOLERANCE_UNREACHABLE: bound {bound:e} still above tolerance after {depth} digits")]
    ToleranceUnreachable { depth: usize, bound: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("subdivision depth {depth} exceeds cap {cap}")]
    DepthCap { depth: usize, cap: usize },

    #[error("word enumeration needs {words} words, above the budget of {budget}")]
    CombinatorialBudget { words: u128, budget: u128 },

    #[error("tangent vanishes at t = {t} (|f(t)| = {norm:e})")]
    ZeroTangent { t: f64, norm: f64 },

    #[error("junction after piece {piece} disagrees by {gap:e}")]
    JunctionMismatch { piece: usize, gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
