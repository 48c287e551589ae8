//! Solvers for `VI(F, K)`.
//!
//! * [`solve_projection`]: `x_{k+1} = P_K[x_k - alpha_k F(x_k)]`
//! * [`solve_extragradient`]: predictor `y_k = P_K[x_k - alpha F(x_k)]`,
//!   corrector `x_{k+1} = P_K[x_k - alpha F(y_k)]`
//! * [`solve_incremental`]: sampled field step followed by a relaxed
//!   projection onto one randomly drawn constraint component
//! * [`integrate_pds`]: Euler scheme for the projected dynamical system
//!
//! Deterministic solvers run regardless of the mapping's properties and
//! report non-convergence through [`Solution::converged`].

mod incremental;
pub mod pds;
mod projection;
mod sampler;
mod schedule;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use incremental::solve_incremental;
pub use pds::{integrate_pds, trajectory_residuals};
pub use projection::{solve_extragradient, solve_projection};
pub use sampler::{touched_range, ConstraintSampler, DEFAULT_PRIORITY_MASS};
pub use schedule::{StepRule, StepSchedule};

use crate::error::Result;
use crate::mapping::check_properties;
use crate::point::{check_dim, Point};
use crate::problem::{Algorithm, Problem, Solution, DEFAULT_RESIDUAL_ALPHA, DEFAULT_TOL};

/// Abort once the residual exceeds this multiple of the initial residual.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Pair samples used to pick default step sizes.
pub const STEP_ESTIMATE_SAMPLES: usize = 64;
pub const STEP_ESTIMATE_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Starting point; `P_K(0)` when absent.
    pub x0: Option<Vec<f64>>,
    pub residual_alpha: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            max_iter: 10_000,
            x0: None,
            residual_alpha: DEFAULT_RESIDUAL_ALPHA,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }
}

/// Everything needed to reproduce a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Falls back to [`default_schedule`] when absent.
    pub schedule: Option<StepSchedule>,
    pub options: SolveOptions,
    /// Only used by the incremental method; uniform when absent.
    pub sampler: Option<ConstraintSampler>,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SolverConfig {
            algorithm,
            schedule: None,
            options: SolveOptions::default(),
            sampler: None,
            seed: 0,
        }
    }

    pub fn with_schedule(mut self, schedule: StepSchedule) -> Self {
        self.schedule = Some(schedule);
        self
    }

    pub fn with_options(mut self, options: SolveOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<Solution> {
    let schedule = match config.schedule {
        Some(s) => s,
        None => default_schedule(problem, config.algorithm)?,
    };
    match config.algorithm {
        Algorithm::Projection => solve_projection(problem, &schedule, &config.options),
        Algorithm::Extragradient => solve_extragradient(problem, &schedule, &config.options),
        Algorithm::Incremental => {
            let sampler = config
                .sampler
                .clone()
                .unwrap_or_else(|| ConstraintSampler::uniform(problem.set().components().len()));
            solve_incremental(problem, &schedule, &sampler, &config.options, config.seed)
        }
    }
}

/// Step sizes from sampled `mu` and `L` over `K`.
///
/// Deterministic methods use `alpha = mu / L^2`, which minimizes the
/// contraction factor `1 - 2 mu alpha + alpha^2 L^2`; without strong
/// monotonicity they fall back to `0.9 / L`. The incremental method gets
/// `a / (k + b)` with `a = 2 / mu` (exact `mu` for affine mappings) and
/// `a / b` matching the deterministic step.
pub fn default_schedule(problem: &Problem, algorithm: Algorithm) -> Result<StepSchedule> {
    let report = check_properties(
        problem.mapping(),
        problem.set(),
        STEP_ESTIMATE_SAMPLES,
        STEP_ESTIMATE_SEED,
    )?;
    let (mu, lipschitz) = (report.mu_estimate, report.lipschitz_estimate);
    if lipschitz <= 0.0 {
        return Ok(match algorithm {
            Algorithm::Incremental => StepSchedule::polynomial(1.0, 1.0, 1.0),
            _ => StepSchedule::constant(1.0),
        });
    }
    let step = if mu > 0.0 {
        mu / (lipschitz * lipschitz)
    } else {
        0.9 / lipschitz
    };
    Ok(match algorithm {
        Algorithm::Incremental => {
            // a mu >= 1 is needed for the O(1/k) rate, so an exact lower
            // bound on mu beats a sampled estimate when one exists
            let mu = match report.certified {
                Some(c) if c.mu > 0.0 => c.mu,
                _ => mu,
            };
            let a = if mu > 0.0 { 2.0 / mu } else { 1.0 / lipschitz };
            StepSchedule::polynomial(a, (a / step).max(1.0), 1.0)
        }
        _ => StepSchedule::constant(step),
    })
}

pub(crate) fn starting_point(problem: &Problem, options: &SolveOptions) -> Result<DVector<f64>> {
    let raw = match &options.x0 {
        Some(x0) => {
            check_dim(problem.dim(), x0.len())?;
            Point::new(x0.clone())?.into_vector()
        }
        None => DVector::zeros(problem.dim()),
    };
    problem.project(&raw)
}

pub(crate) fn validate_options(options: &SolveOptions) -> Result<()> {
    use crate::error::CviError;
    if !(options.tol > 0.0) {
        return Err(CviError::InvalidSchedule(format!("tolerance must be positive, got {}", options.tol)));
    }
    if !(options.residual_alpha > 0.0) {
        return Err(CviError::InvalidSchedule(format!(
            "residual step must be positive, got {}",
            options.residual_alpha
        )));
    }
    Ok(())
}
