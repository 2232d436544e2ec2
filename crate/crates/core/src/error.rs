use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("dangling endpoint: edge `{edge}` references undeclared vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("self-loop: edge `{0}` has identical tail and head")]
    SelfLoop(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("no vertices")]
    NoVertices,
    #[error("graph has no edges")]
    Edgeless,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("vertex `{0}` is not flagged infinite")]
    NotFlagged(String),
    #[error("vertex `{0}` is flagged infinite; a nonzero trace there leaves the form domain")]
    FlaggedVertex(String),
    #[error("linear solver breakdown at step {step}: {reason}")]
    SolverBreakdown { step: usize, reason: String },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("eigensolver did not converge")]
    EigenNoConvergence,
    #[error(
        "kernel dimension mismatch: union-find counts {exact} components, eigensolve counts {numeric} \
         (largest counted eigenvalue {last_zero:e}, smallest uncounted {first_nonzero:e})"
    )]
    KernelMismatch {
        exact: usize,
        numeric: usize,
        last_zero: f64,
        first_nonzero: f64,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
