use thiserror::Error;

/// Errors raised by chain construction, coupling and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid probability {value} for {what}")]
    InvalidProbability { what: String, value: f64 },

    #[error("invalid chain definition: {0}")]
    InvalidSpec(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("unsupported chain pair: {0}")]
    Unsupported(String),

    #[error("condition {condition} does not hold: {detail}")]
    ConditionFailed { condition: u8, detail: String },

    #[error("mixture kernel P_{k} is undefined because lambda_{k} = 0")]
    UndefinedKernel { k: usize },

    #[error("memory length exceeds the hard cap of {cap} (t = {t}, xi = {xi})")]
    HardCap { cap: usize, t: i64, xi: f64 },

    #[error("backtracking exceeded {max_depth} steps below m = {m}")]
    BacktrackDepth { m: i64, max_depth: u64 },

    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(what: impl Into<String>, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { what: what.into(), value })
    }
}
