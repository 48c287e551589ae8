mod common;

use common::{assert_close, lcp_oracle};
use cvi::models::{build_braess, build_lcp, skew_saddle, BraessSpec};
use cvi::solvers::{solve, trajectory_residuals, integrate_pds, SolveOptions, SolverConfig, StepSchedule};
use cvi::{check_properties, Algorithm, CviError, Point};
use nalgebra::{DMatrix, DVector};

fn saddle_config(algorithm: Algorithm) -> SolverConfig {
    SolverConfig::new(algorithm)
        .with_schedule(StepSchedule::constant(0.1))
        .with_options(SolveOptions::default().with_x0(vec![0.5, 0.5]))
}

#[test]
fn extragradient_solves_skew_saddle() {
    let s = solve(&skew_saddle(), &saddle_config(Algorithm::Extragradient)).unwrap();
    assert!(s.converged);
    assert!(s.residual <= 1e-6);
    assert_close(s.point.as_vector(), &[0.0, 0.0], 1e-6);
}

#[test]
fn projection_orbits_on_skew_saddle() {
    // each step multiplies the distance to the saddle by sqrt(1 + alpha^2)
    // until the box stops it
    let s = solve(&skew_saddle(), &saddle_config(Algorithm::Projection)).unwrap();
    assert!(!s.converged);
    assert_eq!(s.iterations, 10_000);
    assert!(s.residual > 1e-8);
}

#[test]
fn default_start_is_already_the_saddle() {
    let s = solve(&skew_saddle(), &SolverConfig::new(Algorithm::Extragradient)).unwrap();
    assert_eq!(s.iterations, 0);
    assert_eq!(s.residual, 0.0);
}

#[test]
fn saddle_properties() {
    let p = skew_saddle();
    let r = check_properties(p.mapping(), p.set(), 64, 1).unwrap();
    assert!(r.monotone && !r.symmetric);
    assert!(r.mu_estimate.abs() < 1e-12);
    assert!(!r.strongly_monotone());
}

#[test]
fn lcp_fixture_matches_enumeration() {
    let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
    let q = DVector::from_row_slice(&[-1.0, -1.0]);
    let oracle = lcp_oracle(&m, &q);
    assert_eq!(oracle.len(), 1);
    assert_close(&oracle[0], &[1.0 / 3.0, 1.0 / 3.0], 1e-15);
    let p = build_lcp(m, q.iter().copied().collect()).unwrap();
    for algorithm in [Algorithm::Projection, Algorithm::Extragradient] {
        let s = solve(&p, &SolverConfig::new(algorithm).with_options(SolveOptions::default().with_tol(1e-10))).unwrap();
        assert_close(s.point.as_vector(), &[1.0 / 3.0, 1.0 / 3.0], 1e-8);
    }
}

#[test]
fn extragradient_agrees_with_projection_on_braess() {
    let p = build_braess(&BraessSpec::default()).unwrap();
    let a = solve(&p, &SolverConfig::new(Algorithm::Projection)).unwrap();
    let b = solve(&p, &SolverConfig::new(Algorithm::Extragradient)).unwrap();
    assert!((a.point.as_vector() - b.point.as_vector()).amax() <= 1e-6);
}

#[test]
fn same_seed_same_run() {
    let p = cvi::models::build_economy(&cvi::models::EconomySpec::two_provider_instance().with_noise(0.5, 3)).unwrap();
    let config = SolverConfig::new(Algorithm::Incremental)
        .with_seed(9)
        .with_options(SolveOptions::default().with_max_iter(500));
    let a = solve(&p, &config).unwrap();
    let b = solve(&p, &config).unwrap();
    assert_eq!(a, b);
    let c = solve(&p, &config.clone().with_seed(10)).unwrap();
    assert_ne!(a.point, c.point);
}

#[test]
fn invalid_inputs_are_rejected() {
    let p = build_braess(&BraessSpec::default()).unwrap();
    let bad_start = SolverConfig::new(Algorithm::Projection).with_options(SolveOptions::default().with_x0(vec![1.0]));
    assert!(matches!(solve(&p, &bad_start), Err(CviError::DimensionMismatch { .. })));
    let bad_step = SolverConfig::new(Algorithm::Projection).with_schedule(StepSchedule::constant(-1.0));
    assert!(matches!(solve(&p, &bad_step), Err(CviError::InvalidSchedule(_))));
    let bad_beta = SolverConfig::new(Algorithm::Incremental).with_schedule(StepSchedule::polynomial(1.0, 1.0, 2.5));
    assert!(matches!(solve(&p, &bad_beta), Err(CviError::InvalidSchedule(_))));
}

#[test]
fn divergence_is_flagged() {
    // a step far beyond 2 mu / L^2 blows up on an unconstrained problem
    let p = cvi::Problem::new(
        cvi::Mapping::affine(DMatrix::identity(2, 2) * 10.0, vec![-1.0, -1.0]).unwrap(),
        cvi::FeasibleSet::boxed(vec![f64::NEG_INFINITY; 2], vec![f64::INFINITY; 2]).unwrap(),
    )
    .unwrap();
    let s = solve(
        &p,
        &SolverConfig::new(Algorithm::Projection)
            .with_schedule(StepSchedule::constant(5.0))
            .with_options(SolveOptions::default().with_x0(vec![1.0, 1.0])),
    )
    .unwrap();
    assert!(!s.converged);
    assert!(s.diagnostics.diverged);
}

#[test]
fn pds_residual_settles() {
    let p = build_braess(&BraessSpec::default()).unwrap();
    let x0 = Point::new(vec![6.0, 0.0, 0.0, 0.0, 6.0]).unwrap();
    let path = integrate_pds(&p, &x0, 0.01, 2000).unwrap();
    let residuals = trajectory_residuals(&p, &path, 1.0).unwrap();
    let tail = &residuals[residuals.len() / 10..];
    for w in tail.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    assert!(integrate_pds(&p, &x0, 0.0, 10).is_err());
}
