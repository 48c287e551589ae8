mod common;

use common::{polyhedron_projection_oracle, projection_suite, set_variants, simplex_oracle};
use cvi::models::braess::incidence_matrix;
use cvi::FeasibleSet;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn nonexpansive_and_variational_on_every_variant() {
    for (name, set) in set_variants() {
        let (expansion, variational) = projection_suite(&set, 1000, 17);
        assert!(expansion <= 1e-9, "{name}: expansion {expansion:e}");
        assert!(variational <= 1e-9, "{name}: variational {variational:e}");
    }
}

#[test]
fn polyhedron_matches_active_set_oracle() {
    let set = cvi::models::build_braess(&Default::default()).unwrap().set().clone();
    let rhs = DVector::from_row_slice(&[6.0, 0.0, 0.0, -6.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let x = DVector::from_fn(5, |_, _| rng.random_range(-10.0..10.0));
        let expected = polyhedron_projection_oracle(&incidence_matrix(), &rhs, &x);
        let got = set.project(&x).unwrap();
        assert!((got - &expected).amax() <= 1e-7, "x = {x:?}");
    }
}

#[test]
fn simplex_reference_points() {
    let set = FeasibleSet::simplex(1.0, 2).unwrap();
    let p = set.project(&DVector::from_row_slice(&[2.0, 0.0])).unwrap();
    assert_eq!(p, DVector::from_row_slice(&[1.0, 0.0]));
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, n)
}

proptest! {
    #[test]
    fn simplex_matches_bisection(x in vector(6), radius in 0.1..20.0f64) {
        let set = FeasibleSet::simplex(radius, 6).unwrap();
        let x = DVector::from_vec(x);
        let got = set.project(&x).unwrap();
        prop_assert!((got - simplex_oracle(&x, radius)).amax() < 1e-9);
    }

    #[test]
    fn box_is_coordinatewise_clamp(x in vector(4)) {
        let set = FeasibleSet::boxed(vec![-1.0, -2.0, 0.0, 5.0], vec![1.0, 2.0, 0.0, 6.0]).unwrap();
        let got = set.project(&DVector::from_vec(x.clone())).unwrap();
        for (i, (lo, hi)) in [(-1.0, 1.0), (-2.0, 2.0), (0.0, 0.0), (5.0, 6.0)].iter().enumerate() {
            prop_assert_eq!(got[i], x[i].clamp(*lo, *hi));
        }
    }

    #[test]
    fn projection_is_idempotent(x in vector(5)) {
        for (name, set) in set_variants() {
            let x = DVector::from_iterator(set.dim(), x.iter().cycle().copied().take(set.dim()));
            let once = set.project(&x).unwrap();
            let twice = set.project(&once).unwrap();
            prop_assert!((&once - &twice).amax() < 1e-9, "{}", name);
            prop_assert!(set.distance(&once).unwrap() < 1e-9, "{}", name);
        }
    }

    #[test]
    fn polyhedron_oracle_agreement(x in vector(5)) {
        let set = cvi::models::build_braess(&Default::default()).unwrap().set().clone();
        let x = DVector::from_vec(x);
        let rhs = DVector::from_row_slice(&[6.0, 0.0, 0.0, -6.0]);
        let expected = polyhedron_projection_oracle(&incidence_matrix(), &rhs, &x);
        prop_assert!((set.project(&x).unwrap() - expected).amax() <= 1e-7);
    }
}
