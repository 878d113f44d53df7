use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {found} samples, grid has {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("symbol is not finite at frequency {frequency}")]
    NonFiniteSymbol { frequency: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("zero mode {coefficient:e} exceeds tolerance {limit:e}; P is undefined on the mean")]
    ZeroModeViolation { coefficient: f64, limit: f64 },

    #[error("kernel symbol vanishes at nonzero grid frequency {frequency}")]
    SymbolZeroOnGrid { frequency: f64 },

    #[error("frequency sample set is empty")]
    EmptySampleSet,

    #[error("quadrature of {what} did not produce a finite value")]
    QuadratureOverflow { what: &'static str },

    #[error("non-finite value produced at t = {t}")]
    Corrupted { t: f64 },

    #[error("Picard iteration diverged: distances {history:?}")]
    PicardDiverged { history: Vec<f64> },

    #[error("series has {found} points, need at least {required}")]
    SeriesTooShort { found: usize, required: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
