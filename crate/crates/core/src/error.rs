use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("n = {n} exceeds the limit of {max} for {what}")]
    Guard { what: &'static str, n: usize, max: usize },

    #[error("radix digit C[{position}] = {digit} is out of range")]
    InvalidDigit { position: usize, digit: usize },

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("phase solve for G_{k} did not converge (residual {residual:e})")]
    PhaseSolve { k: usize, residual: f64 },

    #[error("edge overlap {value} does not fit in an accumulator of {levels} levels")]
    AccumulatorOverflow { value: usize, levels: usize },

    #[error("state norm drifted by {0:e}")]
    NormDrift(f64),

    #[error("postselection branch has zero norm")]
    ZeroNormPostselection,

    #[error("integrator step {dt} exceeds the limit {limit}")]
    StepSize { dt: f64, limit: f64 },

    #[error("endpoints are not antipodal (|e0 + e1| = {0:e})")]
    NotAntipodal(f64),

    #[error("time {t} lies beyond the orthogonality horizon")]
    BeyondHorizon { t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
