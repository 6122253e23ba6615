use thiserror::Error;

use crate::grid::GridSpec;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left:?} vs {right:?}")]
    GridMismatch { left: GridSpec, right: GridSpec },

    #[error("non-finite multiplier value at mode {mode}")]
    NonFiniteSymbol { mode: usize },

    #[error("Helmholtz coefficient must be non-negative, got {0}")]
    NegativeCoefficient(f64),

    #[error("dimension mismatch: expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dyadic partition: {0}")]
    Partition(String),

    #[error("dyadic block index {j} outside [{lo}, {hi}]")]
    BlockOutOfRange { j: i32, lo: i32, hi: i32 },

    #[error("summability index must lie in [1, inf], got {0}")]
    InvalidSummability(f64),

    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonOutOfRange(f64),

    #[error("non-finite parameter value")]
    NonFiniteParameter,

    #[error("parameters not usable here: {0}")]
    Inadmissible(String),

    #[error("Hamiltonian only defined for b=d (got b={b}, d={d})")]
    HamiltonianUndefined { b: f64, d: f64 },

    #[error("Hamiltonian requires {0}")]
    HamiltonianPrecondition(&'static str),

    #[error("energy functional is indefinite: U_j^2 = {value} at block {j}")]
    IndefiniteEnergy { j: i32, value: f64 },

    #[error("initial energy must be positive, got {0}")]
    NonPositiveEnergy(f64),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("non-finite values at t = {t}")]
    BlowUpNumeric { t: f64 },

    #[error("unknown verification suite '{0}'")]
    UnknownSuite(String),

    #[error("unknown parameter preset '{0}'")]
    UnknownPreset(String),

    #[error("no runs found in {0}")]
    NoRunsFound(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
