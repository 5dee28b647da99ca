use thiserror::Error;

/// Failure modes shared across the crate.
///
/// Numeric payloads are carried as `f64` regardless of the working scalar.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("letter {letter} out of range 1..={d}")]
    LetterOutOfRange { letter: usize, d: usize },
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue} below floor {floor}")]
    NotPsd { eigenvalue: f64, floor: f64 },
    #[error("tuple is not jointly nilpotent within its size")]
    NotNilpotent,
    #[error("intertwiner violates alpha Z = Z~ alpha by {violation}")]
    BadIntertwiner { violation: f64 },
    #[error("evaluator is inconsistent across probe sizes (deviation {deviation})")]
    InconsistentEvaluator { deviation: f64 },
    #[error("moment kernel evaluation needs words beyond max_len {max_len} (nilpotency order {order})")]
    TruncationRefused { max_len: usize, order: usize },
    #[error("sampler unavailable: {0}")]
    SamplerUnavailable(String),
    #[error("missing generator pair ({0}, {1})")]
    MissingPair(usize, usize),
    #[error("basis is not closed under the algebra action (residual {residual})")]
    NotSigmaClosed { residual: f64 },
    #[error("algebra action is not a *-representation for the gram (violation {violation})")]
    NotStarRepresentation { violation: f64 },
    #[error("basis functions are linearly dependent (rank {rank} < {size})")]
    LinearlyDependent { rank: usize, size: usize },
    #[error("gram matrix is not positive definite: min eigenvalue {min_eig}")]
    GramNotPositive { min_eig: f64 },
    #[error("gram matrix is not hermitian (violation {violation})")]
    NotHermitian { violation: f64 },
    #[error("linear system is inconsistent (residual {residual})")]
    Infeasible { residual: f64 },
    #[error("result lies outside the target span (residual {residual})")]
    NotInTarget { residual: f64 },
    #[error("operator is not a contraction: norm {norm}")]
    NotContraction { norm: f64 },
    #[error("truncation too short: sampled order {order} exceeds max_len + 1 = {limit}")]
    TruncationTooShort { order: usize, limit: usize },
    #[error("map is not completely positive: choi eigenvalue {eigenvalue}")]
    NotCp { eigenvalue: f64 },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("non-finite entry")]
    NonFinite,
    #[error("duplicate entry: {0}")]
    Duplicate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
