use thiserror::Error;

/// Errors raised by the controller, predictor, estimator and analysis code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("history does not reach time {requested} (oldest retained sample {oldest}, latest {latest})")]
    History {
        requested: i64,
        oldest: i64,
        latest: i64,
    },
    #[error("normal matrix is numerically singular (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("{0} does not provide an analytic Jacobian")]
    Unsupported(String),
    #[error("closed loop is not stable (max |pole| = {max_modulus})")]
    Unstable { max_modulus: f64 },
    #[error("determinant of the polynomial matrix is identically zero")]
    Degenerate,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            got,
        })
    }
}
