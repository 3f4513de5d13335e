use thiserror::Error;

/// Errors raised by state construction, linear algebra, and trajectory
/// integration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("layout must contain at least one subsystem")]
    EmptyLayout,
    #[error("subsystem dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("amplitude vector has length {got}, layout requires {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("state is not normalized: norm = {0}")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian: max |A - A^\u{2020}| = {0:.3e}")]
    NotHermitian(f64),
    #[error("matrix is not unitary: max |U^\u{2020}U - I| = {0:.3e}")]
    NotUnitary(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("tensor product needs at least one factor")]
    EmptyTensorFactors,
    #[error("subsystem index {0} out of range for layout with {1} subsystems")]
    SubsystemOutOfRange(usize, usize),
    #[error("partial trace must keep a nonempty strict subset of subsystems")]
    InvalidKeepSet,
    #[error("dimension {dim} exceeds the dense materialization limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("basis is not orthonormal: max |G - I| = {0:.3e}")]
    NotOrthonormalBasis(f64),
    #[error("basis has {got} states, layout requires {expected}")]
    IncompleteBasis { got: usize, expected: usize },
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("collapse strength lambda must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("parameter {name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("time grid is empty")]
    EmptyGrid,
    #[error("time grid must be strictly increasing with all points > 0")]
    InvalidGrid,
    #[error("branch amplitudes have squared norm {0}, expected 1")]
    BranchNormMismatch(f64),
    #[error("spectral decomposition has no branches")]
    EmptyBranches,
    #[error("non-finite amplitude at integration step {step}")]
    NonFiniteState { step: usize },
    #[error("trajectory {index} aborted: {source}")]
    TrajectoryFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
