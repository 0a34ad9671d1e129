use thiserror::Error;

/// Failures raised by the dilation workbench.
///
/// Every variant corresponds to a mathematical precondition or a numerical
/// certificate that could not be met; none of them signal an internal bug.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a contraction: I - TT* has eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NotAContraction { eigenvalue: f64, tolerance: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operators do not commute: residual {residual:e} exceeds {tolerance:e}")]
    NotCommuting { residual: f64, tolerance: f64 },

    #[error("tuple is not in the class: {0}")]
    NotInClass(String),

    #[error("truncation degree {degree} is insufficient: tail norm {tail:e}")]
    TruncationInsufficient { degree: usize, tail: f64 },

    #[error("realization is not unitary: residual {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("relation {relation} violated: residual {residual:e} exceeds {tolerance:e}")]
    RelationResidualExceeded {
        relation: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("no convergence after {rounds} rounds (last change {change:e})")]
    NoConvergence { rounds: usize, change: f64 },

    #[error("invariant subspace failed to stabilize: dimension {dimension} exceeds bound {bound}")]
    SubspaceGrowthDiverged { dimension: usize, bound: usize },

    #[error("joint spectrum not resolved after {attempts} random combinations")]
    GenericityFailure { attempts: usize },

    #[error("symbol coefficient {coefficient} is not block diagonal: off-block norm {residual:e}")]
    NotBlockDiagonal { coefficient: usize, residual: f64 },

    #[error("operator is not in the commutant: residual {residual:e} exceeds {tolerance:e}")]
    NotACommutant { residual: f64, tolerance: f64 },

    #[error("co-invariant subspace is trivial")]
    DegenerateSubspace,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix has non-finite entries")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;
