use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid MDP: {0}")]
    InvalidMdp(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("policy has no action distribution for reachable history {history:?}")]
    MissingHistory { history: Vec<usize> },
    #[error("horizon {horizon} exceeds the exact-enumeration guard of {max}")]
    HorizonGuard { horizon: usize, max: usize },
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate polytope: interior point violates facet {facet}")]
    Degenerate { facet: usize },
    #[error("divergence at iteration {iteration}: weight magnitude {value}")]
    Divergence { iteration: usize, value: f64 },
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
