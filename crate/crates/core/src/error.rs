use thiserror::Error;

use crate::solvers::IterationTrace;

pub type Result<T, E = TrustError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TrustError {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("matrix has {0} peers, at least 2 are required")]
    TooSmall(usize),
    #[error("entry ({row},{col}) is not a finite number")]
    NonFinite { row: usize, col: usize },
    #[error("entry ({row},{col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("entry ({row},{col}) = {value} is outside the rating scale [1, 10]")]
    OutOfScaleEntry { row: usize, col: usize, value: f64 },
    #[error("peer {peer} rates itself ({value})")]
    SelfRating { peer: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("trust value at index {index} is {value}; trust vectors must be finite and strictly positive")]
    NonPositiveTrust { index: usize, value: f64 },
    #[error("peer {0} has no raters")]
    NoRaters(usize),
    #[error("incidence graph is not strongly connected")]
    NotIrreducible,
    #[error("iteration did not converge within {} iterations (last step {:.3e})", .trace.iterations_used, .trace.errors.last().copied().unwrap_or(f64::NAN))]
    NotConverged { trace: Box<IterationTrace> },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("vector is not a center point (residual {residual:.3e} exceeds {threshold:.3e})")]
    NotAtFixedPoint { residual: f64, threshold: f64 },
    #[error("eigenvalue computation did not converge")]
    NoConvergence,
    #[error("prefactor denominator for peer {peer} is not positive ({value})")]
    SingularPrefactor { peer: usize, value: f64 },
    #[error("matrix has a non-positive entry at ({row},{col})")]
    NotStrictlyPositive { row: usize, col: usize },
    #[error("matrices {first} and {second} share support")]
    NotMutuallyExclusive { first: usize, second: usize },
    #[error("row {0} of the support pattern is empty")]
    EmptyRow(usize),
    #[error("base matrix must be positive exactly on the support; violated at ({row},{col})")]
    SupportMismatch { row: usize, col: usize },
    #[error("error vector is outside the large-error regime at peer {peer} ({delta} <= {trust})")]
    RegimeViolation { peer: usize, delta: f64, trust: f64 },
    #[error("could not generate an irreducible network from seed {seed} after {attempts} attempts")]
    CannotAchieveIrreducible { seed: u64, attempts: usize },
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
