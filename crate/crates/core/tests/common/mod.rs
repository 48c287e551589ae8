//! Reference solutions computed without the library's projection or solver
//! code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Solves `min |y - x|^2  s.t.  By = b, y >= 0` by enumerating every set of
/// coordinates forced to zero and solving the equality-constrained KKT
/// system on the remaining ones. The feasible candidate closest to `x` is the
/// projection.
pub fn polyhedron_projection_oracle(b: &DMatrix<f64>, rhs: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    let n = b.ncols();
    let m = b.nrows();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let free: Vec<usize> = (0..n).filter(|j| mask & (1 << j) == 0).collect();
        let k = free.len();
        // [ I   B_F^T ] [y_F]   [x_F]
        // [ B_F   0   ] [lam] = [ b ]
        let mut kkt = DMatrix::zeros(k + m, k + m);
        let mut r = DVector::zeros(k + m);
        for (a, &j) in free.iter().enumerate() {
            kkt[(a, a)] = 1.0;
            r[a] = x[j];
            for i in 0..m {
                kkt[(a, k + i)] = b[(i, j)];
                kkt[(k + i, a)] = b[(i, j)];
            }
        }
        for i in 0..m {
            r[k + i] = rhs[i];
        }
        // B has dependent rows, so the KKT matrix is singular; take the
        // least-squares solution and keep it only if it is consistent.
        let svd = kkt.clone().svd(true, true);
        let Ok(sol) = svd.solve(&r, 1e-10) else { continue };
        if (&kkt * &sol - &r).amax() > 1e-8 {
            continue;
        }
        let mut y = DVector::zeros(n);
        for (a, &j) in free.iter().enumerate() {
            y[j] = sol[a];
        }
        if y.iter().any(|v| *v < -1e-10) || (b * &y - rhs).amax() > 1e-8 {
            continue;
        }
        let d = (&y - x).norm();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, y.map(|v| v.max(0.0))));
        }
    }
    best.expect("nonempty polyhedron").1
}

/// Interior equilibrium of an affine field: the root of `Mx + c = 0` by LU.
pub fn linear_root(m: &DMatrix<f64>, c: &DVector<f64>) -> DVector<f64> {
    m.clone().lu().solve(&(-c)).expect("nonsingular")
}

/// Solves the LCP `x >= 0, Mx + q >= 0, x^T (Mx + q) = 0` by trying every
/// complementary basis. Degenerate solutions show up under several bases
/// and are reported once.
pub fn lcp_oracle(m: &DMatrix<f64>, q: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = q.len();
    let mut solutions = Vec::new();
    for mask in 0u32..(1 << n) {
        let basic: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let mut x = DVector::zeros(n);
        if !basic.is_empty() {
            let sub = DMatrix::from_fn(basic.len(), basic.len(), |a, c| m[(basic[a], basic[c])]);
            let rhs = DVector::from_fn(basic.len(), |a, _| -q[basic[a]]);
            let Some(sol) = sub.lu().solve(&rhs) else { continue };
            for (a, &j) in basic.iter().enumerate() {
                x[j] = sol[a];
            }
        }
        let w = m * &x + q;
        let duplicate = solutions.iter().any(|s: &DVector<f64>| (s - &x).amax() < 1e-9);
        if x.iter().all(|v| *v >= -1e-12) && w.iter().all(|v| *v >= -1e-12) && !duplicate {
            solutions.push(x);
        }
    }
    solutions
}

pub fn assert_close(actual: &DVector<f64>, expected: &[f64], tol: f64) {
    let gap = actual
        .iter()
        .zip(expected)
        .map(|(a, e)| (a - e).abs())
        .fold(0.0, f64::max);
    assert!(gap <= tol, "got {actual:?}, expected {expected:?} (gap {gap:e})");
}

/// Projection onto `{x >= 0, sum x = r}` by bisection on the threshold
/// `tau` in `sum max(x - tau, 0) = r`.
pub fn simplex_oracle(x: &DVector<f64>, radius: f64) -> DVector<f64> {
    let mass = |tau: f64| x.iter().map(|v| (v - tau).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (x.min() - radius, x.max());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    x.map(|v| (v - tau).max(0.0))
}

/// Worst violations over `pairs` random pairs `(x, y)` and feasible `z`:
/// expansion `|Px - Py| - |x - y|` and variational product
/// `<x - Px, z - Px>`, both of which must be <= 0.
pub fn projection_suite(set: &cvi::FeasibleSet, pairs: usize, seed: u64) -> (f64, f64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = set.dim();
    let mut expansion = f64::NEG_INFINITY;
    let mut variational = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let x = DVector::from_fn(n, |_, _| rng.random_range(-10.0..10.0));
        let y = DVector::from_fn(n, |_, _| rng.random_range(-10.0..10.0));
        let px = set.project(&x).unwrap();
        let py = set.project(&y).unwrap();
        expansion = expansion.max((&px - &py).norm() - (&x - &y).norm());
        let z = set.sample(&mut rng, 10.0).unwrap();
        variational = variational.max((&x - &px).dot(&(&z - &px)));
        variational = variational.max((&x - &px).dot(&(&py - &px)));
    }
    (expansion, variational)
}

/// One instance of every set variant.
pub fn set_variants() -> Vec<(&'static str, cvi::FeasibleSet)> {
    use cvi::FeasibleSet;
    let braess = cvi::models::build_braess(&Default::default()).unwrap().set().clone();
    vec![
        ("box", FeasibleSet::boxed(vec![-1.0, 0.0, -5.0], vec![1.0, 3.0, f64::INFINITY]).unwrap()),
        ("orthant", FeasibleSet::orthant(4)),
        ("simplex", FeasibleSet::simplex(2.0, 5).unwrap()),
        ("polyhedron", braess.clone()),
        (
            "product",
            FeasibleSet::product(vec![
                FeasibleSet::simplex(1.0, 3).unwrap(),
                FeasibleSet::orthant(2),
                FeasibleSet::boxed(vec![-2.0], vec![2.0]).unwrap(),
            ])
            .unwrap(),
        ),
        ("fixed overlay", FeasibleSet::with_fixed(braess, vec![(2, 0.0)]).unwrap()),
    ]
}

/// Random strongly monotone affine problem `M = P^T P / n + S + m I` with
/// `S` skew, plus a random constant-shift intervention. Partitioned trials
/// split the coordinates into 2 or 3 blocks with one set factor per block.
pub fn random_affine_trial<R: rand::Rng>(rng: &mut R, partitioned: bool) -> (cvi::Problem, cvi::Intervention) {
    use cvi::mapping::Component;
    use cvi::{FeasibleSet, Intervention, Mapping, Problem};
    let n = rng.random_range(3..=7);
    let p = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let s = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let modulus = rng.random_range(0.1..1.0);
    let m = p.transpose() * &p / n as f64 + (&s - s.transpose()) + DMatrix::identity(n, n) * modulus;
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let factor = |rng: &mut R, len: usize| {
        if rng.random_bool(0.5) {
            FeasibleSet::orthant(len)
        } else {
            FeasibleSet::boxed(vec![-3.0; len], vec![3.0; len]).unwrap()
        }
    };
    let problem = if partitioned {
        let blocks = rng.random_range(2..=3.min(n));
        let mut cuts: Vec<usize> = (1..n).collect();
        while cuts.len() > blocks - 1 {
            cuts.remove(rng.random_range(0..cuts.len()));
        }
        let bounds: Vec<usize> = std::iter::once(0).chain(cuts).chain(std::iter::once(n)).collect();
        let mut components = Vec::new();
        let mut parts = Vec::new();
        for w in bounds.windows(2) {
            let range = w[0]..w[1];
            let rows = m.rows(range.start, range.len()).into_owned();
            components.push(Component {
                mapping: Mapping::affine(rows, c[range.clone()].to_vec()).unwrap(),
                range: range.clone(),
            });
            parts.push(factor(rng, range.len()));
        }
        Problem::new(
            Mapping::partitioned(components).unwrap(),
            FeasibleSet::product(parts).unwrap(),
        )
        .unwrap()
    } else {
        let set = factor(rng, n);
        Problem::new(Mapping::affine(m, c).unwrap(), set).unwrap()
    };
    let intervention = Intervention::ShiftConstant {
        coordinate_index: rng.random_range(0..n),
        delta: rng.random_range(-5.0..5.0),
    };
    (problem, intervention)
}

pub fn tight_projection() -> cvi::SolverConfig {
    cvi::SolverConfig::new(cvi::Algorithm::Projection)
        .with_options(cvi::SolveOptions::default().with_tol(1e-10).with_max_iter(100_000))
}

/// Every built-in model with a solver configuration suited to it.
pub fn builtin_models() -> Vec<(&'static str, cvi::Problem, cvi::SolverConfig)> {
    use cvi::models::{build_braess, build_economy, build_lcp, skew_saddle, EconomySpec};
    use cvi::{Algorithm, SolveOptions, SolverConfig};
    let tight = || SolverConfig::new(Algorithm::Projection).with_options(SolveOptions::default().with_tol(1e-10));
    vec![
        ("braess", build_braess(&Default::default()).unwrap(), tight()),
        ("economy", build_economy(&EconomySpec::two_provider_instance()).unwrap(), tight()),
        (
            "lcp",
            build_lcp(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]), vec![-1.0, -1.0]).unwrap(),
            tight(),
        ),
        (
            "saddle",
            skew_saddle(),
            SolverConfig::new(Algorithm::Extragradient)
                .with_schedule(cvi::StepSchedule::constant(0.1))
                .with_options(SolveOptions::default().with_tol(1e-10).with_x0(vec![0.5, -0.5])),
        ),
    ]
}

/// Pairs of interventions whose intervened mean fields coincide: two
/// different zero-mean noise laws, and a null shift against a re-expressed
/// copy of the first component.
pub fn equivalent_pairs(problem: &cvi::Problem) -> Vec<(cvi::Intervention, cvi::Intervention)> {
    use cvi::mapping::NoiseModel;
    use cvi::{Intervention, Mapping};
    let range = problem.mapping().component_ranges()[0].clone();
    let first = match problem.mapping().components() {
        Some(c) => c[0].mapping.clone(),
        None => problem.mapping().clone(),
    };
    let copy = {
        let inner = first.clone();
        Mapping::callable(first.input_dim(), first.output_dim(), "copy", move |x| inner.evaluate(x).unwrap())
    };
    vec![
        (
            Intervention::SetNoise {
                component_index: 0,
                noise: NoiseModel::gaussian(vec![0.3; range.len()], 1).unwrap(),
            },
            Intervention::SetNoise {
                component_index: 0,
                noise: NoiseModel::gaussian(vec![0.7; range.len()], 2).unwrap(),
            },
        ),
        (
            Intervention::ShiftConstant {
                coordinate_index: range.start,
                delta: 0.0,
            },
            Intervention::ReplaceComponent {
                component_index: 0,
                new_mapping: copy,
            },
        ),
    ]
}
