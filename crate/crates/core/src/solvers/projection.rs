use nalgebra::DVector;

use super::{starting_point, validate_options, SolveOptions, StepSchedule, DIVERGENCE_FACTOR};
use crate::error::Result;
use crate::point::Point;
use crate::problem::{Algorithm, Diagnostics, Problem, Solution};

pub fn solve_projection(
    problem: &Problem,
    schedule: &StepSchedule,
    options: &SolveOptions,
) -> Result<Solution> {
    schedule.validate_deterministic()?;
    iterate(problem, schedule, options, Algorithm::Projection, |x, alpha| {
        let field = problem.evaluate(x)?;
        problem.project(&(x - field * alpha))
    })
}

pub fn solve_extragradient(
    problem: &Problem,
    schedule: &StepSchedule,
    options: &SolveOptions,
) -> Result<Solution> {
    schedule.validate_deterministic()?;
    iterate(problem, schedule, options, Algorithm::Extragradient, |x, alpha| {
        let predictor = problem.project(&(x - problem.evaluate(x)? * alpha))?;
        problem.project(&(x - problem.evaluate(&predictor)? * alpha))
    })
}

fn iterate<S>(
    problem: &Problem,
    schedule: &StepSchedule,
    options: &SolveOptions,
    algorithm: Algorithm,
    mut step: S,
) -> Result<Solution>
where
    S: FnMut(&DVector<f64>, f64) -> Result<DVector<f64>>,
{
    validate_options(options)?;
    let mut x = starting_point(problem, options)?;
    let initial_residual = problem.residual(&x, options.residual_alpha)?;
    let mut residual = initial_residual;
    let mut iterations = 0;
    let mut diverged = false;
    while residual > options.tol && iterations < options.max_iter {
        let next = step(&x, schedule.alpha(iterations))?;
        if next.iter().any(|v| !v.is_finite()) {
            diverged = true;
            break;
        }
        let next_residual = problem.residual(&next, options.residual_alpha)?;
        x = next;
        residual = next_residual;
        iterations += 1;
        if residual > DIVERGENCE_FACTOR * initial_residual.max(f64::MIN_POSITIVE) {
            diverged = true;
            break;
        }
    }
    Ok(Solution {
        point: Point::from_vector(x)?,
        residual,
        iterations,
        converged: residual <= options.tol,
        algorithm,
        seed: None,
        diagnostics: Diagnostics {
            tol: options.tol,
            residual_alpha: options.residual_alpha,
            initial_residual,
            diverged,
            first_step: schedule.alpha(0),
        },
    })
}
