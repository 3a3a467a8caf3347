use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curve is not unit speed at x = {x}: |c'| = {speed}")]
    NonUnitSpeed { x: f64, speed: f64 },

    #[error("initial normal is zero or parallel to the tangent")]
    DegenerateNormal,

    #[error("magnetic potential cannot be evaluated at {point:?}")]
    EvaluationDomain { point: [f64; 3] },

    #[error("unsupported fiber: {0}")]
    UnsupportedFiber(String),

    #[error("fiber mesh too coarse: {nodes} interior nodes (need at least 100)")]
    MeshTooCoarse { nodes: usize },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("shifted operator is singular or indefinite on the deflated subspace")]
    ShiftSingular,

    #[error("vertical spectral gap {gap:e} too small for the resolvent")]
    GapTooSmall { gap: f64 },

    #[error("variant requires a constant scale function (rigid tube)")]
    NotRigid,

    #[error("vertical spectrum lacks the moments required by this variant")]
    MissingMoments,

    #[error("variant `{0}` is only defined on open curves")]
    ClosedCurveUnsupported(String),

    #[error("admissibility violated: eps * l_max * R * max|kappa| = {value} >= 1")]
    AdmissibilityViolated { value: f64 },

    #[error("closed-curve seam incompatible with fiber mask (holonomy {holonomy} rad)")]
    SeamIncompatible { holonomy: f64 },

    #[error("problem size {unknowns} exceeds the unknown budget {cap}")]
    MemoryBudget { unknowns: usize, cap: usize },

    #[error("neither spectrum intersects the window")]
    EmptyWindow,

    #[error("convergence fit needs positive distances, got {0}")]
    NonPositiveDistance(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }
}
