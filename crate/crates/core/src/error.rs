use thiserror::Error;

/// Errors surfaced by construction, validation, and analysis entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exhaustive search needs {candidates} candidate policies, cap is {cap}; \
             rerun in certified mode with an explicit candidate list")]
    CandidateOverflow { candidates: u128, cap: u128 },

    #[error("environment hash mismatch: log was produced on {expected}, got {actual}")]
    EnvHashMismatch { expected: String, actual: String },

    #[error("reward out of range after shaping: {0}")]
    RewardRange(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
