use crate::dsap::RunTrace;
use crate::vector::Vector;

/// Errors produced by the solvers and their building blocks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in input vector")]
    NonFinite,

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid index vector: {0}")]
    InvalidIndexVector(String),

    #[error("invalid amalgamator: {0}")]
    InvalidAmalgamator(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid step-size rule: {0}")]
    InvalidStepRule(String),

    #[error("invalid perturbation plan: {0}")]
    InvalidPerturbation(String),

    #[error("scheduler emitted an invalid amalgamator at iteration {iteration}: {reason}")]
    ScheduleInvalid {
        iteration: usize,
        reason: String,
        partial: Box<RunTrace>,
    },

    #[error("descent branch selected a zero subgradient (zero-subgradient test disagreed)")]
    ZeroSubgradientInDescent,

    #[error("iterate became non-finite at iteration {iteration}")]
    NonFiniteIterate {
        iteration: usize,
        partial: Box<RunTrace>,
    },

    #[error(
        "intersection projector did not reach tolerance {tol:e} within {sweeps} sweeps \
         (best proximity {proximity:e})"
    )]
    ProjectorStalled {
        tol: f64,
        sweeps: usize,
        proximity: f64,
        best: Box<Vector>,
    },

    #[error("no feasible grid point found; try a finer grid or wider bounds")]
    NoFeasibleGridPoint,

    #[error("minimizer certificate is not a singleton; instance excluded from distance queries")]
    NonUniqueMinimizer,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub(crate) type Result<T> = std::result::Result<T, Error>;
