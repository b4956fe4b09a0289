use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid game: {}", .0.join("; "))]
    InvalidGame(Vec<String>),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("game is not a two-player reach/safety zero-sum game")]
    NotZeroSum,
    #[error("bit-size {bits} exceeds the cap of {cap} bits")]
    BitCap { bits: u64, cap: u64 },
    #[error("{0}")]
    Domain(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
