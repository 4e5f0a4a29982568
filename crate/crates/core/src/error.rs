use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("cyclic group order must be at least 1")]
    EmptyGroup,

    #[error("functions live on different groups ({left} vs {right})")]
    GroupMismatch { left: usize, right: usize },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("uniformity order k must be at least 1")]
    ZeroOrder,

    #[error("oracle too large: needs {required} operations, cap is {cap} (raise the budget to override)")]
    BudgetExceeded { required: u128, cap: u64 },

    #[error("system is not ergodic (needs a single cycle with uniform invariant weights); cube-measure operations assume ergodicity throughout")]
    NotErgodic,

    #[error("not a measure-preserving permutation")]
    NotPermutation,

    #[error("invariant weights invalid: {reason}")]
    BadWeights { reason: String },

    #[error("family must contain {expected} functions, got {got}")]
    FamilySize { expected: usize, got: usize },

    #[error("|f| must be bounded by 1: value at index {index} has modulus {modulus}")]
    SupNormExceeded { index: usize, modulus: f64 },

    #[error("vertex permutation is not a cube isometry")]
    NotCubeIsometry,

    #[error("side axis {axis} out of range for dimension {k}")]
    BadSide { axis: usize, k: usize },

    #[error("progression length must be at least 2")]
    ShortProgression,

    #[error("box integral is negative beyond tolerance ({value}); this indicates an implementation bug")]
    NegativeBoxIntegral { value: f64 },

    #[error("rational rotation number needs a nonzero denominator")]
    ZeroDenominator,

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors caused by an operation-count or materialization cap.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
