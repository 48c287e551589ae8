mod common;

use std::time::Instant;

use common::{assert_close, lcp_oracle, linear_root};
use cvi::models::economy::{exogenize_quality, QUANTITY_BLOCK};
use cvi::models::{build_economy, EconomySpec};
use cvi::solvers::{solve, ConstraintSampler, SolveOptions, SolverConfig, StepSchedule};
use cvi::{apply, check_properties, Algorithm, Intervention, Problem};
use nalgebra::{DMatrix, DVector};

fn economy() -> Problem {
    build_economy(&EconomySpec::two_provider_instance()).unwrap()
}

fn affine_parts(p: &Problem) -> (DMatrix<f64>, DVector<f64>) {
    p.mapping().as_affine().unwrap()
}

/// Interior root of the printed instance, solved by hand:
/// Q = (1213/58, 1727/58), q = (20, 10), pi = Q / 2.
const ROOT: [f64; 6] = [
    1213.0 / 58.0,
    1727.0 / 58.0,
    20.0,
    10.0,
    1213.0 / 116.0,
    1727.0 / 116.0,
];

#[test]
fn oracle_root_is_interior() {
    let (m, c) = affine_parts(&economy());
    let root = linear_root(&m, &c);
    assert_close(&root, &ROOT, 1e-10);
    assert!(root.iter().all(|v| *v > 0.0));
}

#[test]
fn properties_match_description() {
    let p = economy();
    let r = check_properties(p.mapping(), p.set(), 64, 0).unwrap();
    assert!(!r.symmetric);
    assert!(r.positive_definite);
    assert!(r.monotone && r.strongly_monotone());
    assert!(!r.optimization_equivalent());
    let c = r.certified.unwrap();
    // eigenvalues of the symmetrized printed Jacobian
    let (m, _) = affine_parts(&p);
    let sym = (&m + m.transpose()) * 0.5;
    let oracle_mu = sym.symmetric_eigen().eigenvalues.min();
    assert!((c.mu - oracle_mu).abs() < 1e-12);
    assert!((c.mu - 0.97847).abs() < 1e-5);
    assert!(r.mu_estimate >= c.mu - 1e-9);
}

#[test]
fn deterministic_solvers_match_oracle() {
    let p = economy();
    for algorithm in [Algorithm::Projection, Algorithm::Extragradient] {
        let start = Instant::now();
        let s = solve(&p, &SolverConfig::new(algorithm)).unwrap();
        assert!(s.converged, "{algorithm}: {s:?}");
        assert!(s.residual <= 1e-8);
        assert_close(s.point.as_vector(), &ROOT, 1e-6);
        eprintln!("{algorithm}: {} iterations in {:?}", s.iterations, start.elapsed());
    }
}

#[test]
fn incremental_default_schedule_decays_polynomially() {
    // with alpha_k = a / (k + b) the error along an eigenvalue lambda shrinks
    // like (b / k)^(a lambda); the quality block has lambda = 1 and starts 20
    // away, so 10^4 steps leave a gap near 20 (b / 10^4)^a
    let p = economy();
    let schedule = cvi::solvers::default_schedule(&p, Algorithm::Incremental).unwrap();
    let cvi::solvers::StepRule::Polynomial { a, b } = schedule.rule else {
        panic!("expected a polynomial schedule")
    };
    let s = solve(&p, &SolverConfig::new(Algorithm::Incremental)).unwrap();
    let predicted = 20.0 * (b / 1e4).powf(a);
    let err = (s.point[2] - ROOT[2]).abs();
    eprintln!("a = {a}, b = {b}: predicted {predicted:.3e}, observed {err:.3e}");
    assert!(err < 2.0 * predicted && err > 0.5 * predicted);

    let s = solve(
        &p,
        &SolverConfig::new(Algorithm::Incremental)
            .with_options(SolveOptions::default().with_tol(1e-300).with_max_iter(400_000)),
    )
    .unwrap();
    assert_close(s.point.as_vector(), &ROOT, 1e-6);
}

#[test]
fn complementarity_solutions_match_enumeration() {
    // remove the demand intercepts: the quality premium still pays for
    // positive quantities
    let mut spec = EconomySpec::two_provider_instance();
    spec.demand_intercept = vec![0.0, 0.0];
    let p = build_economy(&spec).unwrap();
    let (m, c) = affine_parts(&p);
    let oracle = lcp_oracle(&m, &c);
    assert_eq!(oracle.len(), 1);
    let s = solve(&p, &SolverConfig::new(Algorithm::Projection)).unwrap();
    assert_close(s.point.as_vector(), oracle[0].as_slice(), 1e-6);

    // without the premium, marginal cost exceeds the price at every Q
    spec.quality_premium = vec![0.0, 0.0];
    let p = build_economy(&spec).unwrap();
    let (m, c) = affine_parts(&p);
    let oracle = lcp_oracle(&m, &c);
    assert_eq!(oracle.len(), 1);
    assert_close(&oracle[0], &[0.0, 0.0, 20.0, 10.0, 0.0, 0.0], 1e-12);
    let s = solve(&p, &SolverConfig::new(Algorithm::Projection)).unwrap();
    assert_close(s.point.as_vector(), oracle[0].as_slice(), 1e-6);
}

#[test]
fn equilibrium_conditions_hold_componentwise() {
    let p = economy();
    let s = solve(&p, &SolverConfig::new(Algorithm::Projection)).unwrap();
    let f = p.evaluate(s.point.as_vector()).unwrap();
    for (fi, xi) in f.iter().zip(s.point.iter()) {
        assert!(*fi >= -1e-6);
        if *xi > 1e-6 {
            assert!(fi.abs() <= 1e-6);
        }
    }
}

#[test]
fn shifted_constant_moves_equilibrium_to_oracle() {
    let p = economy();
    // F1_211 constant from -199 to -150
    let shifted = apply(
        &p,
        &Intervention::ShiftConstant {
            coordinate_index: 1,
            delta: 49.0,
        },
    )
    .unwrap()
    .intervened;
    let (m, c) = affine_parts(&shifted);
    assert_eq!(c[1], -150.0);
    let s = solve(&shifted, &SolverConfig::new(Algorithm::Projection)).unwrap();
    assert_close(s.point.as_vector(), linear_root(&m, &c).as_slice(), 1e-6);
}

#[test]
fn exogenized_quality_changes_only_quantities() {
    let spec = EconomySpec::two_provider_instance();
    let p = build_economy(&spec).unwrap();
    let treated = apply(&p, &exogenize_quality(&spec, 0).unwrap()).unwrap().intervened;
    let (m, c) = affine_parts(&treated);
    assert_eq!(m[(0, 2)], 0.0);
    let root = linear_root(&m, &c);
    let s = solve(&treated, &SolverConfig::new(Algorithm::Projection)).unwrap();
    assert_close(s.point.as_vector(), root.as_slice(), 1e-6);
    // the quality block still chooses q = target
    assert!((root[2] - 20.0).abs() < 1e-12);
    // losing the premium lowers the first provider's output
    assert!(root[0] < ROOT[0]);
}

fn noisy_run(schedule: StepSchedule, iterations: usize, sampler: Option<ConstraintSampler>) -> DVector<f64> {
    let p = build_economy(&EconomySpec::two_provider_instance().with_noise(0.1, 7)).unwrap();
    let mut config = SolverConfig::new(Algorithm::Incremental)
        .with_schedule(schedule)
        .with_seed(7)
        // tolerance below the noise floor: run the whole budget
        .with_options(SolveOptions::default().with_tol(1e-300).with_max_iter(iterations));
    config.sampler = sampler;
    let s = solve(&p, &config).unwrap();
    assert_eq!(s.iterations, iterations);
    assert!(!s.diagnostics.diverged);
    s.point.into_vector()
}

fn max_error(x: &DVector<f64>) -> f64 {
    x.iter().zip(ROOT).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn noisy_incremental_run_approaches_oracle() {
    let start = Instant::now();
    let x = noisy_run(StepSchedule::polynomial(2.0, 10.0, 1.0), 200_000, None);
    let err = max_error(&x);
    eprintln!("a=2, b=10: error {err:.3e} in {:?}", start.elapsed());
    assert!(err <= 1e-2);
}

#[test]
fn small_step_constant_is_too_slow() {
    // with a mu < 1 the deterministic error decays like k^(-a mu); the
    // quality block (mu = 1, error 20 at the start) keeps a gap of roughly
    // 20 (b / k)^(1/2) after 2e5 steps
    let x = noisy_run(StepSchedule::polynomial(0.5, 10.0, 1.0), 200_000, None);
    let err = max_error(&x);
    eprintln!("a=0.5, b=10: error {err:.3e}");
    assert!(err > 1e-2);
}

#[test]
fn noiseless_incremental_matches_projection() {
    let p = economy();
    let projection = solve(
        &p,
        &SolverConfig::new(Algorithm::Projection).with_options(SolveOptions::default().with_tol(1e-10)),
    )
    .unwrap();
    let incremental = solve(
        &p,
        &SolverConfig::new(Algorithm::Incremental)
            .with_schedule(StepSchedule::polynomial(2.0, 10.0, 1.0))
            .with_seed(7)
            .with_options(SolveOptions::default().with_tol(1e-300).with_max_iter(200_000)),
    )
    .unwrap();
    let gap = (projection.point.as_vector() - incremental.point.as_vector()).amax();
    assert!(gap <= 1e-6, "gap {gap:e}");
}

#[test]
fn prioritized_sampling_converges() {
    let spec = EconomySpec::two_provider_instance();
    let p = build_economy(&spec).unwrap();
    let intervention = exogenize_quality(&spec, 1).unwrap();
    let treated = apply(&p, &intervention).unwrap().intervened;
    let prioritized = ConstraintSampler::for_interventions(&treated, std::slice::from_ref(&intervention)).unwrap();
    assert!(prioritized.probabilities()[QUANTITY_BLOCK] > 1.0 / 3.0);
    let mut counts = Vec::new();
    for sampler in [ConstraintSampler::uniform(3), prioritized] {
        let mut config = SolverConfig::new(Algorithm::Incremental)
            .with_seed(11)
            .with_options(SolveOptions::default().with_tol(1e-5).with_max_iter(400_000));
        config.sampler = Some(sampler);
        let s = solve(&treated, &config).unwrap();
        assert!(s.converged);
        counts.push(s.iterations);
    }
    eprintln!("uniform: {} iterations, prioritized: {} iterations", counts[0], counts[1]);
}
