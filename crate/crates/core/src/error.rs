use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite coordinate or value: {0}")]
    NonFinite(String),

    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("line {line}: {message}")]
    BarrierParse { line: usize, message: String },

    #[error("escape grid needs at least one crossing neighbor")]
    EmptyNeighborInfo,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("location ({x}, {y}) lies inside a barrier")]
    LocationInBarrier { x: f64, y: f64 },

    #[error(
        "reference locations {first} and {second} are among the first m+1 in the ordering \
         but the segment between them is blocked; try a different ordering"
    )]
    InitialNodesBlocked { first: usize, second: usize },

    #[error("reference node {node} is isolated: the escape grid found no reachable earlier node")]
    IsolatedUnreachable { node: usize },

    #[error("no reference location is reachable from ({x}, {y})")]
    NoReachableNeighbor { x: f64, y: f64 },

    #[error("negative distance {0}")]
    NegativeDistance(f64),

    #[error("invalid covariance specification: {0}")]
    InvalidSpec(String),

    #[error("neighbor Gram matrix{} is singular even after jitter", node.map(|n| format!(" of node {n}")).unwrap_or_default())]
    SingularNeighborGram { node: Option<usize> },

    #[error("precision matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite likelihood at iteration {iteration}")]
    NonFiniteLikelihood { iteration: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("prediction site {index} is missing covariates")]
    MissingCovariates { index: usize },

    #[error("length mismatch: {0} predictions vs {1} truths")]
    LengthMismatch(usize, usize),

    #[error("nothing to evaluate")]
    EmptyEvaluation,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("variogram bins are degenerate: {0}")]
    DegenerateBins(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
