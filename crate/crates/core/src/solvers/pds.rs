use crate::error::{CviError, Result};
use crate::point::{check_dim, Point};
use crate::problem::Problem;

/// Euler discretization of the projected dynamical system
/// `dX/dt = Pi_K(X, -F(X))`:
///
/// ```text
/// X_{t+1} = P_K(X_t - delta F(X_t))
/// ```
///
/// Returns `steps + 1` points starting at `P_K(x0)`.
pub fn integrate_pds(problem: &Problem, x0: &Point, delta: f64, steps: usize) -> Result<Vec<Point>> {
    check_dim(problem.dim(), x0.dim())?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(CviError::InvalidSchedule(format!("time step must be positive, got {delta}")));
    }
    let mut x = problem.project(x0.as_vector())?;
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(Point::from_vector(x.clone())?);
    for _ in 0..steps {
        let field = problem.evaluate(&x)?;
        x = problem.project(&(&x - field * delta))?;
        trajectory.push(Point::from_vector(x.clone())?);
    }
    Ok(trajectory)
}

/// Natural residual of every trajectory point.
pub fn trajectory_residuals(problem: &Problem, trajectory: &[Point], alpha: f64) -> Result<Vec<f64>> {
    trajectory
        .iter()
        .map(|p| problem.residual(p.as_vector(), alpha))
        .collect()
}
