use thiserror::Error;

/// Errors raised by the lattice, energy, geometry and decomposition routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}; only 3 and 4 are supported")]
    Dimension(usize),

    #[error("radius parameter must be positive, got {0}")]
    NonPositiveRadius(i64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty point set")]
    EmptySet,

    #[error("support budget exceeded: estimated {estimated} entries, budget {budget}")]
    SupportBudget { estimated: u128, budget: u128 },

    #[error("tuple budget exceeded: {tuples} tuples, budget {budget}")]
    TupleBudget { tuples: u128, budget: u128 },

    #[error("work budget exceeded: about {work} accumulation steps, budget {budget}")]
    WorkBudget { work: u128, budget: u128 },

    #[error("grid budget exceeded: {grid} grid points, budget {budget}")]
    GridBudget { grid: u128, budget: u128 },

    #[error("subset budget exceeded: {subsets} subsets, budget {budget}, sampling disabled")]
    SubsetBudget { subsets: u128, budget: u128 },

    #[error("coordinate box too large to pack into a 64-bit key ({bits} bits needed)")]
    KeyWidth { bits: u32 },

    #[error("representation counts overflow 64 bits (|A|^s = {size}^{s})")]
    CountOverflow { size: usize, s: u32 },

    #[error("numerical residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("hyperplane has all-zero normal vector")]
    ZeroNormal,

    #[error("zero vector is not allowed here")]
    ZeroVector,

    #[error("hyperplane passes through the origin")]
    PlaneThroughOrigin,

    #[error("duplicate shift {0}")]
    DuplicateShift(String),

    #[error("missing weight for {0}")]
    MissingWeight(String),

    #[error("representation function has s = {found}, expected {expected}")]
    FoldMismatch { expected: u32, found: u32 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
