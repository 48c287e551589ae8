//! Builders for the concrete equilibrium problems.

pub mod braess;
pub mod economy;

use nalgebra::DMatrix;

use crate::error::{CviError, Result};
use crate::mapping::Mapping;
use crate::problem::Problem;
use crate::sets::FeasibleSet;

pub use braess::{build_braess, path_delays, BraessSpec};
pub use economy::{build_economy, EconomySpec};

/// Names accepted by the CLI model descriptor.
pub const BUILTIN_MODELS: [&str; 4] = ["braess", "economy_2x1x2", "lcp", "saddle"];

/// `F(x) = Mx + q` over the nonnegative orthant.
pub fn build_lcp(matrix: DMatrix<f64>, q: Vec<f64>) -> Result<Problem> {
    if !matrix.is_square() {
        return Err(CviError::InvalidModel(format!(
            "LCP matrix must be square, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let n = matrix.nrows();
    Problem::new(Mapping::affine(matrix, q)?, FeasibleSet::orthant(n))
}

/// Bilinear saddle `f(u, v) = u^T A v` over a box, as the VI with
/// `F(u, v) = (A v, -A^T u)`.
pub fn build_saddle(a: DMatrix<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Problem> {
    let (p, r) = a.shape();
    let n = p + r;
    let mut matrix = DMatrix::zeros(n, n);
    matrix.view_mut((0, p), (p, r)).copy_from(&a);
    matrix.view_mut((p, 0), (r, p)).copy_from(&(-a.transpose()));
    let set = FeasibleSet::boxed(lower, upper)?;
    let labels = (0..p)
        .map(|i| format!("u_{}", i + 1))
        .chain((0..r).map(|i| format!("v_{}", i + 1)))
        .collect();
    Problem::new(Mapping::affine(matrix, vec![0.0; n])?, set)?.with_labels(labels)
}

/// `f(u, v) = uv` on `[-1, 1]^2`.
pub fn skew_saddle() -> Problem {
    build_saddle(
        DMatrix::from_element(1, 1, 1.0),
        vec![-1.0, -1.0],
        vec![1.0, 1.0],
    )
    .expect("valid unit box")
}
