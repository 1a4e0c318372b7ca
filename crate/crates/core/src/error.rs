use thiserror::Error;

/// Errors shared by every module of the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EislabError {
    #[error("gamma has a pole at s = {re} + {im}i")]
    GammaPole { re: f64, im: f64 },

    #[error("zeta has a pole at s = 1")]
    ZetaPole,

    #[error("argument out of supported domain: {0}")]
    Domain(String),

    #[error("precision loss: truncation index {n_max} exceeds the supported limit")]
    PrecisionLoss { n_max: u64 },

    #[error("level {0} is not square-free")]
    NotSquareFree(u64),

    #[error("no primes in [{lo}, {hi}]")]
    NoPrimes { lo: u64, hi: u64 },

    #[error("feasibility guard: predicted {predicted:.3e} candidates exceeds cap {cap:.3e}")]
    Feasibility { predicted: f64, cap: f64 },

    #[error("determinant mismatch: matrix has det {found}, expected {expected}")]
    DetMismatch { found: i64, expected: i64 },

    #[error("{0} is not a perfect square")]
    NonSquare(u64),

    #[error("iteration limit reached in {0}")]
    IterationLimit(&'static str),

    #[error("kernel property failure: {0}")]
    PropertyFailure(String),

    #[error("inequality check failed: {0}")]
    CheckFailed(String),
}

pub type Result<T> = std::result::Result<T, EislabError>;
