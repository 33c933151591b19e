//! Error type shared by all simulation modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Validation and simulation failures.
///
/// Construction of domain types checks their invariants eagerly, so
/// downstream operations can assume well-formed inputs and only report the
/// failures listed on their own contract.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state must have dimension >= 1")]
    EmptyState,

    #[error("state vector is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("basis label inconsistent with dimension: {reason}")]
    BasisMismatch { reason: String },

    #[error("matrix is not Hermitian (max deviation {max_dev:e})")]
    NotHermitian { max_dev: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace must be 1 (got {trace})")]
    TraceNotUnit { trace: f64 },

    #[error("observable must square to the identity (max deviation {max_dev:e})")]
    NotInvolution { max_dev: f64 },

    #[error("observable must have both +1 and -1 eigenvalues")]
    TrivialObservable,

    #[error("mixture weight must be non-negative (got {weight})")]
    NegativeWeight { weight: f64 },

    #[error("mixture weights must sum to 1 (got {sum})")]
    WeightSum { sum: f64 },

    #[error("{name} must lie in [{min}, {max}] (got {value})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("anti-bunching probability {value} is too far outside [0, 0.5] to be clamped")]
    CorruptProbability { value: f64 },

    #[error("cannot normalize counts: {reason}")]
    ZeroCounts { reason: &'static str },

    #[error("measurement schedule is informationally incomplete (rank {rank}, need {needed})")]
    IncompleteSchedule { rank: usize, needed: usize },

    #[error("record list does not match schedule: {reason}")]
    RecordMismatch { reason: String },

    #[error("walk needs {needed} bins but only {capacity} are allocated")]
    CapacityOverflow { needed: usize, capacity: usize },

    #[error("shift would move amplitude {amplitude:e} out of the top bin")]
    TopBinOccupied { amplitude: f64 },

    #[error("coin projection annihilates the state (success probability {probability:e})")]
    ProjectionAnnihilates { probability: f64 },

    #[error("synthesis of a dimension-{dim} state needs at least {needed} steps (got {got})")]
    TooFewSteps { dim: usize, needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
