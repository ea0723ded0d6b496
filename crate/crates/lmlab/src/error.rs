use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("chart mismatch between operands")]
    ChartMismatch,
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
    #[error("sampling aborted: {skipped} of {count} samples hit singularity guards (domain badly chosen)")]
    TooManySkipped { skipped: usize, count: usize },
    #[error("guard expression `{what}` vanishes (|value| < guard) on too many samples")]
    GuardVanishes { what: String },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("form degree error: {0}")]
    Degree(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal consistency violation: {0}")]
    Inconsistent(String),
    #[error("trajectory left the enlarged domain box at t = {time}: {point:?}")]
    TrajectoryExit { time: f64, point: Vec<f64> },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document error: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
