//! Four-node Braess network with linear edge delays.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CviError, Result};
use crate::mapping::Mapping;
use crate::point::check_dim;
use crate::problem::Problem;
use crate::sets::FeasibleSet;

/// Directed edges in coordinate order.
pub const EDGES: [(usize, usize); 5] = [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)];

/// Index of the diagonal edge (2,3).
pub const MIDDLE_EDGE: usize = 2;

/// Edge indices of the paths 1-2-4, 1-2-3-4 and 1-3-4.
pub const PATHS: [&[usize]; 3] = [&[0, 3], &[0, 2, 4], &[1, 4]];

pub const PATH_NAMES: [&str; 3] = ["1-2-4", "1-2-3-4", "1-3-4"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BraessSpec {
    /// Vehicles per unit time from node 1 to node 4.
    pub demand: f64,
    pub slopes: [f64; 5],
    pub constants: [f64; 5],
}

impl Default for BraessSpec {
    fn default() -> Self {
        BraessSpec {
            demand: 6.0,
            slopes: [10.0, 1.0, 1.0, 1.0, 10.0],
            constants: [0.0, 50.0, 10.0, 50.0, 0.0],
        }
    }
}

/// Node-edge incidence matrix: +1 where an edge leaves a node, -1 where it
/// enters.
pub fn incidence_matrix() -> DMatrix<f64> {
    let mut b = DMatrix::zeros(4, EDGES.len());
    for (e, &(from, to)) in EDGES.iter().enumerate() {
        b[(from - 1, e)] = 1.0;
        b[(to - 1, e)] = -1.0;
    }
    b
}

/// Edge delays `F(x) = diag(slopes) x + constants` over
/// `K = {x >= 0 : Bx = (d, 0, 0, -d)}`.
pub fn build_braess(spec: &BraessSpec) -> Result<Problem> {
    if !(spec.demand.is_finite() && spec.demand >= 0.0) {
        return Err(CviError::InvalidModel(format!("demand must be nonnegative, got {}", spec.demand)));
    }
    if spec.slopes.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(CviError::InvalidModel("edge slopes must be nonnegative".into()));
    }
    let mapping = Mapping::affine(
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&spec.slopes)),
        spec.constants.to_vec(),
    )?;
    let d = spec.demand;
    let set = FeasibleSet::polyhedron(incidence_matrix(), vec![d, 0.0, 0.0, -d], true)?;
    Problem::new(mapping, set)?.with_labels(
        EDGES
            .iter()
            .map(|(a, b)| format!("x{a}{b}"))
            .collect(),
    )
}

/// Delay of each path (1-2-4, 1-2-3-4, 1-3-4) as the sum of its edge delays.
pub fn path_delays(problem: &Problem, x: &nalgebra::DVector<f64>) -> Result<[f64; 3]> {
    check_dim(EDGES.len(), problem.dim())?;
    let edge_delay = problem.evaluate(x)?;
    Ok(PATHS.map(|edges| edges.iter().map(|&e| edge_delay[e]).sum()))
}

/// Paths carrying strictly positive flow on every edge.
pub fn used_paths(x: &nalgebra::DVector<f64>, threshold: f64) -> [bool; 3] {
    PATHS.map(|edges| edges.iter().all(|&e| x[e] > threshold))
}
