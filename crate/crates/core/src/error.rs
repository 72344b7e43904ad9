use thiserror::Error;

/// Errors raised by the simulator library.
///
/// The CLI maps these onto its exit-code contract, so variants are grouped by
/// the class of failure rather than by the module that produced them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The protocol assumes small per-step noise; the request is outside it.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("truncation risk: |gamma|^2 = {norm_sqr:.4} exceeds cutoff/4 = {limit:.4}")]
    TruncationRisk { norm_sqr: f64, limit: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("impossible measurement outcome (probability {probability:.3e})")]
    ImpossibleOutcome { probability: f64 },

    #[error("postselection starvation: no trajectory was accepted out of {trials}")]
    PostselectionStarvation { trials: usize },

    #[error("Trotter count {n} is below the required bound {bound:.3}")]
    TrotterGuard { n: usize, bound: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("layer structure: {0}")]
    LayerStructure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::OutOfRegime(msg.into())
    }
}
