use thiserror::Error;

/// Errors surfaced by model construction, the LP engine and the synthesis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid scenario config: {0}")]
    Config(String),

    #[error("invalid reach-avoid spec: {0}")]
    InvalidSpec(String),

    #[error("LP solver failure: {0}")]
    Lp(String),

    #[error("threshold {threshold} exceeds the optimal reach-avoid value {v_star}")]
    InfeasibleThreshold { threshold: f64, v_star: f64 },

    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("policy does not match the game: {0}")]
    Policy(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
