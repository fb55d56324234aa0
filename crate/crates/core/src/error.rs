use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("layer index {index} out of range (graph has layers 0..={last})")]
    LayerOutOfRange { index: usize, last: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid boundary data: {0}")]
    InvalidBoundary(String),

    /// The Gram matrix of the boundary functions is singular, so the
    /// partition function vanishes and the path measure is undefined.
    #[error("singular Gram matrix: partition function is zero")]
    SingularGram,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value {value} at {context}")]
    NonFinite { value: f64, context: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("argument {value} outside the accuracy window [{lo}, {hi}]")]
    OutOfWindow { value: f64, lo: f64, hi: f64 },

    #[error("tolerance not met: {0}")]
    Tolerance(String),

    #[error("overflow while conjugating kernel at ({x}, {y}); choose a tamer conjugation pair")]
    ConjugationOverflow { x: f64, y: f64 },

    #[error("step too coarse: delta * max h = {0} >= 1")]
    StepTooCoarse(f64),

    #[error("no convergence after {0} sweeps")]
    NoConvergence(usize),
}
