use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown species `{0}` and no mass override given")]
    UnknownSpecies(String),

    #[error("integration produced a non-finite value at r = {r} (step too coarse near the core?)")]
    NonFiniteIntegration { r: f64 },

    #[error("asymptotic fit residual {residual:.3e} exceeds tolerance {tolerance:.3e}; grid too short")]
    AsymptoteFit { residual: f64, tolerance: f64 },

    #[error("could not bracket the requested branch: {0}")]
    Bracketing(String),

    #[error("target scattering length {target} unreachable on branch with {nodes} nodes")]
    Unreachable { target: f64, nodes: usize },

    #[error("quadrature did not converge: doubling the order moved an entry by {shift:.3e} (relative)")]
    QuadratureNonConvergence { shift: f64 },

    #[error("eigensolver failed to converge after {iterations} iterations")]
    EigenFailure { iterations: usize },

    #[error("grid is not strictly ascending at index {index}")]
    NonMonotoneGrid { index: usize },

    #[error("no bound states below the threshold")]
    NoBoundStates,

    #[error("unfolding polynomial is not monotone over the window (derivative {derivative:.3e} at E = {energy})")]
    NonMonotoneUnfolding { energy: f64, derivative: f64 },

    #[error("insufficient levels: need {needed}, have {available}")]
    InsufficientLevels { needed: usize, available: usize },

    #[error("interval length L = {length} too large for span {span}")]
    LengthTooLarge { length: f64, span: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
