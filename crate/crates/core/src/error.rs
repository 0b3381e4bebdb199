use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} lies outside the length horizon (radius cap {cap})")]
    RadiusExceeded { element: String, cap: u32 },

    #[error("budget exceeded: {what} needs {requested} elements, cap is {cap}")]
    BudgetExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("weight axiom violated: {0}")]
    AxiomViolation(String),

    #[error("no admissibility evidence: {0}")]
    NotAdmissibleEvidence(String),

    #[error("operators live on different domains")]
    DomainMismatch,

    #[error("entry ({row}, {col}) has difference length {length} > propagation {propagation}")]
    PropagationViolation {
        row: usize,
        col: usize,
        length: u32,
        propagation: u32,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{method} did not converge after {iterations} iterations")]
    NoConvergence { method: &'static str, iterations: usize },

    #[error("A*A is not positive definite at this truncation (C1 = {c1:e}, C2 = {c2:e})")]
    NotPositiveDefinite { c1: f64, c2: f64 },

    #[error("operator is not self-adjoint (max asymmetry {0:e})")]
    NotSelfAdjoint(f64),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
