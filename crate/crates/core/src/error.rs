use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace {trace} differs from 1")]
    Trace { trace: f64 },

    #[error("operator is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("meter is not zero-grounded (min eigenvalue {min_eigenvalue:e})")]
    NotZeroGrounded { min_eigenvalue: f64 },

    #[error("singular operator (min eigenvalue {min_eigenvalue:e} below {reg_tol:e})")]
    Singular { min_eigenvalue: f64, reg_tol: f64 },

    #[error("degenerate observable variance {variance:e}")]
    Degenerate { variance: f64 },

    #[error("unbiasedness residual {residual:e} exceeds {tol:e}")]
    Unbiasedness { residual: f64, tol: f64 },

    #[error("Kraus family has no zero outcome (lowest outcome {lowest})")]
    MissingZeroOutcome { lowest: f64 },

    #[error("internal consistency check `{check}` failed (error {error:e})")]
    InternalConsistency { check: &'static str, error: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Schema {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(self, path: impl Into<String>) -> Error {
        Error::Schema {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
