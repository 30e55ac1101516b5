use thiserror::Error;

/// Errors shared across the solver and the modules built on top of it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Newton iteration diverged: residual {residual:.3e} after {iterations} iterations")]
    NewtonDivergence { residual: f64, iterations: usize },

    #[error("mesh refinement exceeded the configured node limit ({limit} nodes)")]
    MeshLimitExceeded { limit: usize },

    #[error("singular Jacobian encountered at column {column}")]
    SingularJacobian { column: usize },

    #[error("evaluation point r = {r} outside the solution domain [0, {r_max}]")]
    OutOfDomain { r: f64, r_max: f64 },

    #[error("Newton converged to the trivial zero solution after {retries} guess rescalings")]
    ConvergedToZero { retries: usize },

    #[error("profile solved on [0, {profile_r_max}] is too small for the requested domain [0, {requested}]")]
    ProfileDomainTooSmall { profile_r_max: f64, requested: f64 },

    #[error("index-function solve failed: {0}")]
    StepFailure(String),

    #[error("|u| dips to {min_abs:.3e} near r = {r:.6} without a sign change; tangential zero suspected")]
    SuspectedTangentialZero { r: f64, min_abs: f64 },

    #[error("asymptotic-constant estimator varies by {variation:.2}% over the tail window; no plateau")]
    NoPlateau { variation: f64 },

    #[error("index count cannot be certified: tail sign constant c0 = {c0:.3e} is within estimator noise {noise:.3e}")]
    UncertifiedTail { c0: f64, noise: f64 },

    #[error("solution norm {solution_norm:.3e} exceeds 1e6 x rhs norm {rhs_norm:.3e}; near-resonant operator suspected")]
    ResonanceSuspected { solution_norm: f64, rhs_norm: f64 },

    #[error("inner-product matrix is numerically degenerate (|det| = {det:.3e}); certificate withheld")]
    DegenerateMatrix { det: f64 },

    #[error("continuation in b stalled at b = {b:.6} (step {step:.2e} below 1e-5)")]
    ContinuationStall { b: f64, step: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
