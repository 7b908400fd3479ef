use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("singular anisotropy matrix (condition estimate {condition:e})")]
    SingularAnisotropy { condition: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field has {got} values but the space has {expected} points")]
    FieldLength { expected: usize, got: usize },

    #[error("parameter {name} = {value} out of range: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("missing coordinates: {0}")]
    MissingCoordinates(&'static str),

    #[error("space is not a regular grid")]
    NotAGrid,

    #[error("invalid Young function: {0}")]
    InvalidYoung(String),

    #[error("modular never drops to 1: {0}")]
    NoBracket(String),

    #[error("gradient check failed: relative error {rel_error:e} exceeds {tolerance:e}")]
    GradientCheck { rel_error: f64, tolerance: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_param(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            reason,
        })
    }
}
