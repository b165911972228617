use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("{stage} rejection sampler exceeded {iters} iterations (lambda = {lambda})")]
    RejectionLimit {
        stage: &'static str,
        lambda: f64,
        iters: u64,
    },

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {abs_err:e} after {intervals} intervals")]
    Quadrature {
        a: f64,
        b: f64,
        abs_err: f64,
        intervals: usize,
    },

    #[error("invalid bin edges: {0}")]
    Binning(String),

    #[error("fit refused: {0}")]
    Fit(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: impl ToString, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason,
        }
    }
}
