use crate::geom::Point;

/// Errors shared by every estimator in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An iterate landed exactly on the singular set. Iteration stops rather
    /// than propagating NaNs through ensemble statistics; callers may retry
    /// with a perturbed start.
    #[error("orbit hit the singular set at ({}, {}) after {step} steps", at.x, at.y)]
    HitSingularSet { at: Point, step: usize },

    /// An iterate left the domain of the system.
    #[error("orbit left the domain at ({}, {}) after {step} steps", at.x, at.y)]
    LeftDomain { at: Point, step: usize },

    #[error("unknown system family `{0}`")]
    UnknownFamily(String),

    #[error("parameter `{name}` = {value}: {reason}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("system `{0}` has an empty singular set")]
    EmptySingularSet(String),

    /// Forward-invariant region search did not converge (skew-product
    /// construction).
    #[error("invariant region search failed: {0}")]
    RegionSearchFailed(String),

    /// A constructed deformation violates one of the cone/expansion
    /// conditions it must satisfy.
    #[error("construction rejected: {0}")]
    ConditionViolated(String),

    /// A tracked tangent vector left the invariant cone.
    #[error("tangent vector left the cone field at step {step}")]
    ConeLoss { step: usize },

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("all {0} sampled starts failed")]
    AllStartsFailed(usize),

    #[error("invalid Markov model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
