use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("dataset has no continuous variables")]
    NoContinuous,
    #[error("variable selection is empty")]
    EmptySelection,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("Minkowski order must be >= 1, got {0}")]
    InvalidOrder(f64),
    #[error("level `{level}` of variable `{variable}` is never observed")]
    EmptyLevel { variable: String, level: String },
    #[error("too few subjects: have {n}, need at least {required}")]
    TooFewSubjects { n: usize, required: usize },
    #[error("invalid cluster count k={k} for n={n}")]
    InvalidK { k: usize, n: usize },
    #[error("sparsity bound s={s} outside [1, {max}]")]
    InvalidSparsity { s: f64, max: f64 },
    #[error("subsample fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("mixture component collapsed in every restart")]
    DegenerateComponent,
    #[error("label vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("contingency table is degenerate (a variable is constant)")]
    DegenerateTable,
    #[error("need at least {required} points, got {got}")]
    TooShort { got: usize, required: usize },
    #[error("every variable was dropped during selection")]
    NothingSelected,
    #[error("correlation must lie in [0, 1), got {0}")]
    InvalidRho(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed binary matrix: {0}")]
    Format(String),
}
