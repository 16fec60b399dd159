use thiserror::Error;

/// Errors produced by constructors, solvers and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular or ill-conditioned (cond ~ {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("matrix is not symmetric positive-definite")]
    NotPositiveDefinite,

    #[error("domain polytope is empty or has empty interior")]
    EmptyPolytope,

    #[error("function is not integrable: a recession direction has a non-increasing exponent")]
    NotIntegrable,

    #[error("level {t} exceeds the maximum value {max}")]
    EmptyLevelSet { t: f64, max: f64 },

    #[error("level set at the maximum of a Gaussian form degenerates to a point")]
    DegenerateLevelSet,

    #[error("frame is not orthonormal (defect {defect:.3e})")]
    FrameNotOrthonormal { defect: f64 },

    #[error("unbounded polytope where a bounded one is required")]
    UnboundedPolytope,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("hypothesis not verified: {0}")]
    HypothesisNotVerified(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
