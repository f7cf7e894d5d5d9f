use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("singular design matrix at k = {k}")]
    SingularDesign { k: usize },

    #[error("polyhedral set is infeasible (best min-slack {min_slack:e})")]
    Infeasible { min_slack: f64 },

    #[error("active-set iteration cap {cap} exceeded (working set {working_set:?}, last step norm {step_norm:e})")]
    IterationCap {
        cap: usize,
        working_set: Vec<usize>,
        step_norm: f64,
    },

    #[error("KKT certificate failed: stationarity {stationarity:e}, min multiplier {min_multiplier:e}, complementarity {complementarity:e}, infeasibility {infeasibility:e}")]
    KktFailure {
        stationarity: f64,
        min_multiplier: f64,
        complementarity: f64,
        infeasibility: f64,
    },

    #[error("empty constrained grid: {0}")]
    EmptyConstraint(String),

    #[error("localized grid leaves the valid break range; clipped s values: {clipped:?}")]
    GridOutOfRange { clipped: Vec<f64> },

    #[error("profile grid too coarse: refinement at beta = {beta} improves objective by {improvement:e}; use a finer grid")]
    ProfileGridTooCoarse { beta: f64, improvement: f64 },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("empty sample")]
    EmptySample,

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
