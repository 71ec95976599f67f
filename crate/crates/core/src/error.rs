use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid level scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("level index {index} out of range for {levels} levels")]
    LevelOutOfRange { index: usize, levels: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numeric invariant breached ({kind}) at t = {t}: magnitude {magnitude:e}")]
    InvariantBreach {
        kind: InvariantKind,
        t: f64,
        magnitude: f64,
    },

    #[error("negative eigenvalue {0:e} below tolerance")]
    NegativeEigenvalue(f64),

    #[error("unequal decay rates are not supported here: {0}")]
    UnequalRates(String),

    #[error("no interior peak: {0}")]
    NoPeak(String),

    #[error("fit is not identifiable: {0}")]
    Unidentifiable(String),

    #[error("fit did not converge after {iterations} iterations")]
    FitDidNotConverge { iterations: usize },

    #[error("window too short: {0}")]
    WindowTooShort(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum InvariantKind {
    Trace,
    Hermiticity,
    Positivity,
}

impl std::fmt::Display for InvariantKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InvariantKind::Trace => "trace",
            InvariantKind::Hermiticity => "hermiticity",
            InvariantKind::Positivity => "positivity",
        };
        f.write_str(s)
    }
}
