use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sampler gave up after {attempts} attempts for particle {index}; temperature is far above the trap depth")]
    AttemptCapExceeded { index: usize, attempts: u64 },

    #[error("sampler acceptance too low: {fraction:.3e} of candidates were bound (minimum {minimum:.1e})")]
    AcceptanceTooLow { fraction: f64, minimum: f64 },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("probe weights sum to zero")]
    ZeroWeight,

    #[error("sample times must be non-negative and ascending")]
    UnsortedTimes,

    #[error("invalid echo sequence: {0}")]
    InvalidSequence(String),

    #[error("trace too short: {0}")]
    TraceTooShort(String),

    #[error("no oscillation found in trace")]
    NoOscillation,

    #[error("window out of range: {0}")]
    WindowOutOfRange(String),

    #[error("mismatched traces: {0}")]
    MismatchedTraces(String),
}
