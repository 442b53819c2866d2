use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("at least {min} oscillators required, got {found}")]
    TooFewOscillators { min: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty index set")]
    EmptyIndexSet,

    #[error("index {index} out of range for {len} oscillators")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("divergence at step {step}: |theta| reached {max_abs:e}")]
    Divergence { step: u64, max_abs: f64 },

    #[error("point lies outside the working domain")]
    OutOfDomain,

    #[error("probe requires a critical point (gradient norm {grad_norm:e})")]
    NotCritical { grad_norm: f64 },

    #[error("unresolved classification at t = {t}: gradient norm {grad_norm:e}")]
    UnresolvedClassification { t: f64, grad_norm: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("horizon mismatch: need t = {needed}, reference covers {covered}")]
    HorizonMismatch { needed: f64, covered: f64 },

    #[error("result was produced by a different problem or step size")]
    ProvenanceMismatch,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
