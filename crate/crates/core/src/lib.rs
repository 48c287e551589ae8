//! Causal variational inequalities: equilibrium problems `VI(F, K)`, causal
//! interventions that induce submodels, projection solvers and
//! intervention-effect analysis.

pub mod analysis;
pub mod error;
pub mod intervention;
pub mod linalg;
pub mod mapping;
pub mod models;
pub mod point;
pub mod problem;
pub mod sets;
pub mod solvers;

pub use error::{CviError, Result};
pub use intervention::{apply, apply_all, Intervention, Submodel};
pub use mapping::{check_properties, Mapping, NoiseModel, PropertyReport};
pub use point::Point;
pub use problem::{natural_residual, normal_cone_check, Algorithm, Problem, Solution};
pub use sets::FeasibleSet;
pub use solvers::{solve, SolveOptions, SolverConfig, StepSchedule};
