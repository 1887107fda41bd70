//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("time grid must be nonempty")]
    EmptyGrid,
    #[error("grid times must be strictly increasing (violation at index {index})")]
    NonIncreasingTimes { index: usize },
    #[error("grid times must be nonnegative (got {value})")]
    NegativeTime { value: f64 },
    #[error("time {value} is not a grid point")]
    TimeNotOnGrid { value: f64 },
    #[error("window bounds out of order: r = {r} > t = {t}")]
    WindowBounds { r: f64, t: f64 },
    #[error("window is not contained in the parent window")]
    WindowNotContained,
    #[error("expected {expected} values for the window, got {actual}")]
    ValueCountMismatch { expected: usize, actual: usize },
    #[error("weight components must be nonnegative (component {index} = {value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("path values must all share one state kind and dimension")]
    InconsistentStateKind,
    #[error("input path window does not match the transform source window")]
    SourceWindowMismatch,
    #[error("transform windows are incompatible with its kind: {reason}")]
    IncompatibleWindows { reason: String },
    #[error("{kind} transform does not support {state} paths")]
    UnsupportedState {
        kind: &'static str,
        state: &'static str,
    },
    #[error("composition chain windows do not match at stage {index}")]
    ChainMismatch { index: usize },
    #[error("projection operation requires a singleton target window")]
    NonSingletonTarget,
    #[error("need at least {min} samples, got {got}")]
    NotEnoughSamples { min: u64, got: u64 },
    #[error("norm order must satisfy p >= 1 (got {p})")]
    InvalidNormOrder { p: f64 },
    #[error("invalid law: {reason}")]
    InvalidLaw { reason: String },
    #[error("law does not satisfy the {clause} hypothesis (mean {mean})")]
    LawHypothesis { clause: &'static str, mean: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("grid time {value} lies outside the sine-demo range [0, 3\u{3c0}]")]
    OutsideDemoRange { value: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
