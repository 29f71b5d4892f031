use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid order: discriminant {0} is a perfect square or not congruent to 0, 1 mod 4")]
    InvalidOrder(i64),

    #[error("exceptional trace: t^2 - 4n = {disc} is a perfect square for (t, n) = ({t}, {n})")]
    ExceptionalTrace { t: i64, n: i64, disc: i64 },

    #[error("resource bound exceeded in {what} (bound {bound})")]
    Resource { what: &'static str, bound: u64 },

    #[error("numeric failure in {what}: achieved tolerance {achieved:e}, requested {requested:e}")]
    Numeric {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },

    #[error("truncation budget too small: {what} tail estimate {tail:e} exceeds cap {cap:e}")]
    BudgetTooSmall {
        what: &'static str,
        tail: f64,
        cap: f64,
    },

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// CLI exit status: 0 pass, 1 fail, 2 usage, 3 numeric/resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Domain(_) | Error::InvalidOrder(_) => 2,
            _ => 3,
        }
    }
}
