use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    starting_point, validate_options, ConstraintSampler, SolveOptions, StepSchedule,
    DIVERGENCE_FACTOR,
};
use crate::error::{CviError, Result};
use crate::point::Point;
use crate::problem::{Algorithm, Diagnostics, Problem, Solution};

/// Two-step incremental projection:
///
/// ```text
/// z_k     = x_k - alpha_k F(x_k, v_k)
/// x_{k+1} = z_k - beta (z_k - P_{w_k} z_k)
/// ```
///
/// `v_k` is a noise draw of the mapping and `w_k` a constraint component
/// drawn from `sampler`. Iterates may leave `K`; convergence is judged on
/// `P_K(x_k)`, which is also the reported point.
pub fn solve_incremental(
    problem: &Problem,
    schedule: &StepSchedule,
    sampler: &ConstraintSampler,
    options: &SolveOptions,
    seed: u64,
) -> Result<Solution> {
    schedule.validate_incremental()?;
    validate_options(options)?;
    let components = problem.set().components().len();
    if sampler.components() != components {
        return Err(CviError::InvalidSchedule(format!(
            "sampler covers {} components but the feasible set has {components}",
            sampler.components()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_base = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);

    let mut x = starting_point(problem, options)?;
    let mut reported = x.clone();
    let initial_residual = problem.residual(&x, options.residual_alpha)?;
    let mut residual = initial_residual;
    let mut iterations = 0;
    let mut diverged = false;
    while residual > options.tol && iterations < options.max_iter {
        let alpha = schedule.alpha(iterations);
        let sample = problem
            .mapping()
            .evaluate_sample(&x, draw_base.wrapping_add(iterations as u64))?;
        let z = &x - sample * alpha;
        let component = sampler.draw(&mut rng);
        let projected = problem.set().project_component(component, &z)?;
        let next = &z - (&z - projected) * schedule.beta;
        iterations += 1;
        if next.iter().any(|v| !v.is_finite()) {
            diverged = true;
            break;
        }
        x = next;
        let feasible = problem.project(&x)?;
        residual = problem.residual(&feasible, options.residual_alpha)?;
        reported = feasible;
        if residual > DIVERGENCE_FACTOR * initial_residual.max(f64::MIN_POSITIVE) {
            diverged = true;
            break;
        }
    }
    Ok(Solution {
        point: Point::from_vector(reported)?,
        residual,
        iterations,
        converged: residual <= options.tol,
        algorithm: Algorithm::Incremental,
        seed: Some(seed),
        diagnostics: Diagnostics {
            tol: options.tol,
            residual_alpha: options.residual_alpha,
            initial_residual,
            diverged,
            first_step: schedule.alpha(0),
        },
    })
}
