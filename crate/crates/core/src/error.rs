use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid workspace: {0}")]
    InvalidWorkspace(String),
    #[error("object radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("instance needs at least one object")]
    NoObjects,
    #[error("initial and target arrangements differ in size ({initial} vs {target})")]
    SizeMismatch { initial: usize, target: usize },
    #[error("invalid arrangement: {0}")]
    InvalidArrangement(String),
    #[error("infeasible density: placed {placed} of {requested} objects within {attempts} attempts")]
    InfeasibleDensity {
        requested: usize,
        placed: usize,
        attempts: usize,
    },
    #[error("object index {index} out of range for {n} objects")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("stale motion: object {index} is at {actual:?}, motion picks at {expected:?}")]
    StaleMotion {
        index: usize,
        expected: [f64; 2],
        actual: [f64; 2],
    },
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
