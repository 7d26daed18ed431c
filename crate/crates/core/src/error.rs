use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("partition must have at least one atom")]
    EmptyPartition,
    #[error("invalid atom label {0:?}: labels must be non-empty and distinct")]
    BadAtomLabel(String),
    #[error("gamble has {got} values but the partition has {expected} atoms")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at atom {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("gambles are defined on different partitions")]
    PartitionMismatch,
    #[error("atom index {0} is outside the partition")]
    AtomOutOfRange(usize),
    #[error("conditioning event is empty")]
    EmptyConditioningEvent,
    #[error("{value} lies outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("gamble value {value} lies outside the function domain [{lo}, {hi}]")]
    DomainMismatch { value: f64, lo: f64, hi: f64 },
    #[error("duplicate assessment entry {0:?}")]
    DuplicateName(String),
    #[error("unknown assessment entry {0:?}")]
    UnknownName(String),

    #[error("malformed linear program: {0}")]
    MalformedProgram(String),
    #[error("polyhedron is unbounded; vertex enumeration needs a bounded region")]
    UnboundedRegion,
    #[error("vertex enumeration budget exceeded ({dims} variables, {candidates} candidate bases)")]
    VertexBudgetExceeded { dims: usize, candidates: u128 },

    #[error("credal set is empty")]
    EmptyCredalSet,
    #[error("credal set with mean constraint E(X) = {c} is empty")]
    EmptyConstrainedCredalSet { c: f64 },

    #[error("{at} is not an interior point of [{lo}, {hi}]")]
    BoundaryPoint { at: f64, lo: f64, hi: f64 },
    #[error("lower value {lower} exceeds upper value {upper}")]
    ConjugacyViolation { lower: f64, upper: f64 },
    #[error("invalid function: {0}")]
    BadFunction(String),
    #[error("exponents must satisfy 0 < s < t (got s = {s}, t = {t})")]
    BadExponents { s: f64, t: f64 },
    #[error("moment value {0} is negative")]
    NegativeMoment(f64),
    #[error("power must be at least 2 (got {0})")]
    BadPower(u32),
    #[error("odd moments need a nonnegative gamble")]
    NotNonnegative,

    #[error("threshold must be strictly positive (got {0})")]
    NonPositiveThreshold(f64),
    #[error("epsilon must be strictly positive (got {0})")]
    NonPositiveEpsilon(f64),
    #[error("inequality requires a nonnegative gamble but nonnegativity was not asserted")]
    NegativityFlagMissing,
    #[error("negative argument {0}")]
    NegativeArgument(f64),
    #[error("lower prevision is zero; the crossover point is undefined")]
    ZeroLowerPrevision,

    #[error("report carries no certifiable target")]
    MissingTarget,
}

pub type Result<T> = std::result::Result<T, Error>;
