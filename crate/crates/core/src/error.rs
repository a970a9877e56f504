use thiserror::Error;

/// Errors produced by kernel construction, signal I/O, smoothing and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("time ordering error: t_now = {t_now} must exceed t_last = {t_last}")]
    Ordering { t_last: f64, t_now: f64 },

    #[error("horizon {horizon} too short: kernel tail mass deficit {deficit:e} exceeds {limit:e}")]
    TailMass {
        horizon: f64,
        deficit: f64,
        limit: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
