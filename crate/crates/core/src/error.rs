use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is not two-valued in its spurious feature: {0}")]
    NotTwoValued(String),

    #[error("group `{0}` is empty")]
    MissingGroup(&'static str),

    /// The hard-margin dual grew past its cap, which only happens when no
    /// classifier meets every margin target.
    #[error("margin problem is not separable (dual objective {dual_objective:.3e} exceeded cap)")]
    NotSeparable { dual_objective: f64 },

    #[error("margin problem is infeasible")]
    Infeasible,

    #[error("solver did not converge after {iterations} iterations (kkt residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("exhaustive oracle budget exceeded: {points} points, {dims} dims")]
    BudgetExceeded { points: usize, dims: usize },

    #[error("non-finite gradient at t = {t}: {detail}")]
    NonFinite { t: f64, detail: String },

    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated file: {0}")]
    TruncatedFile(String),

    #[error("count mismatch: {0}")]
    CountMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
