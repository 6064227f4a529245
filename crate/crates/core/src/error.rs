use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed graph document: {0}")]
    MalformedGraph(String),

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("node id {id} out of range for a graph with {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("unknown topology kind `{0}` (expected star, complete, path or cycle)")]
    UnknownTopology(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("transmission vector is not valid for the state: node {0} is not eligible")]
    InvalidTransmission(usize),

    #[error(
        "state space too large: {required} states needed, cap is {cap}; \
         lower T or n, raise the cap, or use the simulator"
    )]
    StateSpaceTooLarge { required: String, cap: usize },

    #[error("stationary solver did not converge after {iterations} iterations (last change {delta:.3e})")]
    NoConvergence { iterations: usize, delta: f64 },

    #[error("chain is periodic with period {0}; perturb p so that some eligible node has p_i < 1")]
    PeriodicChain(usize),

    #[error("singular balance system while solving for the stationary distribution")]
    SingularSystem,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by computational limits rather than bad input.
    pub fn is_computational_limit(&self) -> bool {
        matches!(
            self,
            Error::StateSpaceTooLarge { .. } | Error::NoConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
