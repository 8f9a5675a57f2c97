use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{0} contains non-finite entries")]
    NonFinite(&'static str),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("weight matrix is not Hermitian positive definite ({0})")]
    WeightNotPositiveDefinite(String),
    #[error("constraint rows are rank deficient: rank {rank} < {rows} rows")]
    RankDeficientConstraints { rank: usize, rows: usize },
    #[error("coupling operator is not coercive: nu = {nu:e}")]
    NotCoercive { nu: f64 },
    #[error("skew pairing A12 = -A21^* violated: residual {residual:e} > {tol:e}")]
    SkewPairingViolated { residual: f64, tol: f64 },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("defective peripheral eigenvalue: algebraic multiplicity {algebraic}, geometric {geometric}")]
    DefectivePeripheral { algebraic: usize, geometric: usize },
    #[error("invalid {what}: {reason}")]
    InvalidInput { what: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            what,
            reason: reason.into(),
        }
    }
}
