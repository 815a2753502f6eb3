use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("constellation size must be at least 2, got {0}")]
    ConstellationSize(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid interval: lower bound {lo} exceeds upper bound {hi}")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("noise increment requested out of order: t_next = {requested} < state = {state}")]
    OutOfOrder { requested: f64, state: f64 },
    #[error("horizon {horizon} lies before the start time {t0}")]
    InvalidHorizon { horizon: f64, t0: f64 },
    #[error("no firing for {stalled} s after t = {since} (limit {limit} s); bias too small for the input")]
    NonPositiveDrive {
        since: f64,
        stalled: f64,
        limit: f64,
    },
    #[error("time encodings must be positive, encoding {index} is {value}")]
    NonPositiveEncoding { index: usize, value: f64 },
    #[error("symbol interval {0} holds fewer than two firings")]
    FiringDeficit(usize),
    #[error(
        "least-squares system ill-conditioned: condition estimate {estimate:e} exceeds cap {cap:e}"
    )]
    IllConditioned { estimate: f64, cap: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
