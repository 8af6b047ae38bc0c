use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid rank {rank} for family {family}")]
    InvalidRank { family: String, rank: usize },

    #[error("invalid root system: {0}")]
    InvalidRootSystem(String),

    #[error("index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("highest weight must have positive simple-root coordinates (coordinate {index} is {value})")]
    NonPositiveWeight { index: usize, value: String },

    #[error("stratum {0:?} is not lambda-connected")]
    NotConnected(Vec<usize>),

    #[error("stratum must be a proper subset of the simple roots")]
    NotProper,

    #[error("rank {rank} exceeds the enumeration limit {limit}")]
    RankTooLarge { rank: usize, limit: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("polytope is unbounded along ray {ray:?}")]
    Unbounded { ray: Vec<String> },

    #[error("invalid expansion map: {0}")]
    InvalidSpec(String),

    #[error("quadrature did not converge: estimate {estimate:e} with error {error:e} after {evals} evaluations")]
    NonConvergence { estimate: f64, error: f64, evals: usize },

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("{0}")]
    Budget(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("interior direction: defining form is {value:e} (tolerance {tol:e})")]
    InteriorDirection { value: f64, tol: f64 },

    #[error("no K-reduction available for {0}")]
    NoKReduction(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("not found: {name}; valid names: {valid}")]
    NotFound { name: String, valid: String },

    #[error("too few data points: {0}")]
    TooFew(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
