use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum HnsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular multiplier: {0}")]
    SingularMultiplier(String),

    #[error("unsupported norm: {0}")]
    UnsupportedNorm(String),

    #[error("inconclusive inequality report for {name}: all {skipped} samples had a vanishing right-hand side")]
    Inconclusive { name: String, skipped: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("stability precondition violated: {0}")]
    Unstable(String),

    #[error("missing state: {0}")]
    MissingState(String),

    #[error("time misalignment: state at t = {state}, reference at t = {reference}")]
    Misaligned { state: f64, reference: f64 },

    #[error("blow-up detected at t = {time}")]
    BlowUp { time: f64 },

    #[error("Picard iteration is not contracting (distances {trace:?})")]
    ContractionFailure { trace: Vec<f64> },

    #[error(
        "Picard iteration did not converge within {max_iter} iterations (distances {trace:?})"
    )]
    NoConvergence { max_iter: usize, trace: Vec<f64> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid observation window: {0}")]
    InvalidWindow(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HnsError>;
