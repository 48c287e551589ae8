//! The variational inequality `VI(F, K)`: find `x* in K` with
//! `<F(x*), y - x*> >= 0` for every `y in K`.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{CviError, Result};
use crate::mapping::Mapping;
use crate::point::{check_dim, Point};
use crate::sets::FeasibleSet;

pub const DEFAULT_RESIDUAL_ALPHA: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const PROBE_FEASIBILITY_TOL: f64 = 1e-9;
pub const NORMAL_CONE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Problem {
    mapping: Mapping,
    set: FeasibleSet,
    labels: Option<Vec<String>>,
}

impl Problem {
    pub fn new(mapping: Mapping, set: FeasibleSet) -> Result<Self> {
        let n = set.dim();
        if n == 0 {
            return Err(CviError::InvalidModel("problem dimension must be positive".into()));
        }
        check_dim(n, mapping.input_dim())?;
        check_dim(n, mapping.output_dim())?;
        Ok(Problem {
            mapping,
            set,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_dim(self.dim(), labels.len())?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn mapping(&self) -> &Mapping {
        &self.mapping
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, index: usize) -> String {
        self.labels
            .as_ref()
            .and_then(|l| l.get(index).cloned())
            .unwrap_or_else(|| format!("x_{}", index + 1))
    }

    pub(crate) fn with_parts(&self, mapping: Mapping, set: FeasibleSet) -> Result<Problem> {
        let mut p = Problem::new(mapping, set)?;
        p.labels = self.labels.clone();
        Ok(p)
    }

    /// Coordinates pinned by a clamp; they are exogenous and do not count
    /// towards the residual.
    pub fn exogenous(&self) -> Vec<usize> {
        self.set.fixed().iter().map(|(i, _)| *i).collect()
    }

    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.set.project(x)
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.mapping.evaluate(x)
    }

    /// `x - P_K(x - alpha F(x))` with exogenous coordinates zeroed.
    pub fn residual_vector(&self, x: &DVector<f64>, alpha: f64) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        if !(alpha > 0.0) {
            return Err(CviError::InvalidModel(format!("residual step must be positive, got {alpha}")));
        }
        let field = self.mapping.evaluate(x)?;
        let mut r = x - self.set.project(&(x - field * alpha))?;
        for i in self.exogenous() {
            r[i] = 0.0;
        }
        Ok(r)
    }

    pub fn residual(&self, x: &DVector<f64>, alpha: f64) -> Result<f64> {
        Ok(self.residual_vector(x, alpha)?.norm())
    }
}

/// Natural residual `|x - P_K(x - alpha F(x))|_2`, zero exactly at solutions.
pub fn natural_residual(x: &Point, problem: &Problem, alpha: f64) -> Result<f64> {
    problem.residual(x.as_vector(), alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalConeReport {
    pub max_violation: f64,
    pub holds: bool,
}

/// Checks `<F(x), y - x> >= 0` at each probe `y in K`, i.e. that `-F(x)`
/// lies in the normal cone of `K` at `x`, with the default tolerance.
pub fn normal_cone_check(x: &Point, problem: &Problem, probes: &[Point]) -> Result<NormalConeReport> {
    normal_cone_check_with_tol(x, problem, probes, NORMAL_CONE_TOL)
}

pub fn normal_cone_check_with_tol(
    x: &Point,
    problem: &Problem,
    probes: &[Point],
    tol: f64,
) -> Result<NormalConeReport> {
    check_dim(problem.dim(), x.dim())?;
    let field = problem.evaluate(x.as_vector())?;
    let mut max_violation: f64 = 0.0;
    for (index, y) in probes.iter().enumerate() {
        check_dim(problem.dim(), y.dim())?;
        let distance = problem.set().distance(y.as_vector())?;
        if distance > PROBE_FEASIBILITY_TOL {
            return Err(CviError::ProbeOutsideSet { index, distance });
        }
        let violation = -field.dot(&(y.as_vector() - x.as_vector()));
        max_violation = max_violation.max(violation);
    }
    Ok(NormalConeReport {
        max_violation,
        holds: max_violation <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Projection,
    Extragradient,
    Incremental,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Projection => "projection",
            Algorithm::Extragradient => "extragradient",
            Algorithm::Incremental => "incremental",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = CviError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(Algorithm::Projection),
            "extragradient" => Ok(Algorithm::Extragradient),
            "incremental" => Ok(Algorithm::Incremental),
            other => Err(CviError::InvalidModel(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub tol: f64,
    pub residual_alpha: f64,
    pub initial_residual: f64,
    pub diverged: bool,
    /// Step size of the first iteration.
    pub first_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub point: Point,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub algorithm: Algorithm,
    pub seed: Option<u64>,
    pub diagnostics: Diagnostics,
}
