use nalgebra::DVector;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CviError>;

#[derive(Debug, Clone, Error)]
pub enum CviError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("invalid feasible set: {0}")]
    InvalidSet(String),

    #[error("feasible set is empty: {0}")]
    EmptySet(String),

    #[error("projection did not converge after {iterations} iterations (distance estimate {distance:.3e})")]
    ProjectionNotConverged {
        iterations: usize,
        distance: f64,
        last: DVector<f64>,
    },

    #[error("probe {index} lies outside the feasible set (distance {distance:.3e})")]
    ProbeOutsideSet { index: usize, distance: f64 },

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),

    #[error("could not sample feasible points: {0}")]
    SamplingFailure(String),

    #[error("invalid step schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid intervention: {0}")]
    InvalidIntervention(String),

    #[error("conflicting clamps on coordinate {0}")]
    ConflictingClamp(usize),

    #[error("component index {index} out of range ({count} components)")]
    ComponentOutOfRange { index: usize, count: usize },

    #[error("unsupported analysis: {0}")]
    UnsupportedAnalysis(String),

    #[error("mapping is not strongly monotone (mu = {mu:.3e})")]
    NotStronglyMonotone { mu: f64 },

    #[error("{which} solve did not converge (residual {residual:.3e})")]
    SolveNotConverged { which: String, residual: f64 },

    #[error("mapping is not partitioned")]
    NotPartitioned,

    #[error("invalid model specification: {0}")]
    InvalidModel(String),
}
