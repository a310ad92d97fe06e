use thiserror::Error;

/// Errors produced by the controller, environments and experiment harness.
#[derive(Debug, Error)]
pub enum TcaError {
    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid observation: {0}")]
    InvalidObservation(String),

    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("hypothesis index {index} out of range for {count} hypotheses")]
    HypothesisOutOfRange { index: usize, count: usize },

    #[error("degenerate likelihood: posterior mass vanished for every hypothesis")]
    DegenerateLikelihood,

    #[error("invalid observation model: {0}")]
    InvalidModel(String),

    #[error("invalid environment config: {0}")]
    InvalidEnvConfig(String),

    #[error("invalid controller config: {0}")]
    InvalidControllerConfig(String),

    #[error("invalid agent spec: {0}")]
    InvalidAgent(String),

    #[error("no episodes to summarize")]
    EmptyRuns,

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TcaError>;
