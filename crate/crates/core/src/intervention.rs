//! Causal interventions as model surgery on `CVI(F, K)`.
//!
//! A clamp `do(x_j = c)` changes the feasible set (the coordinate becomes
//! exogenous); every other variant changes the mean field `F_w`.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CviError, Result};
use crate::mapping::{Mapping, NoiseModel};
use crate::problem::Problem;
use crate::sets::{FeasibleSet, DEFAULT_SAMPLE_SCALE};

/// Gap below which two intervened mean fields count as identical.
pub const IRRELEVANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum Intervention {
    ClampVariable { index: usize, value: f64 },
    ReplaceComponent { component_index: usize, new_mapping: Mapping },
    ShiftConstant { coordinate_index: usize, delta: f64 },
    SetNoise { component_index: usize, noise: NoiseModel },
}

impl Intervention {
    /// True for interventions that only touch the mapping, leaving `K` alone.
    pub fn is_mapping_type(&self) -> bool {
        !matches!(self, Intervention::ClampVariable { .. })
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Intervention::ShiftConstant { delta, .. } if *delta == 0.0)
    }
}

impl fmt::Display for Intervention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Intervention::ClampVariable { index, value } => write!(f, "do(x[{index}] = {value})"),
            Intervention::ReplaceComponent { component_index, .. } => {
                write!(f, "replace(F[{component_index}])")
            }
            Intervention::ShiftConstant {
                coordinate_index,
                delta,
            } => write!(f, "shift(F[{coordinate_index}] += {delta})"),
            Intervention::SetNoise {
                component_index,
                noise,
            } => write!(
                f,
                "noise(F[{component_index}] ~ N({:?}, {:?}), seed {})",
                noise.mean(),
                noise.stddev(),
                noise.seed()
            ),
        }
    }
}

/// The intervened model `CVI(F_w, K_w)` together with the model it came from.
#[derive(Debug, Clone)]
pub struct Submodel {
    pub base: Problem,
    pub interventions: Vec<Intervention>,
    pub intervened: Problem,
}

pub fn apply(problem: &Problem, intervention: &Intervention) -> Result<Submodel> {
    apply_all(problem, std::slice::from_ref(intervention))
}

/// Applies interventions left to right. Two clamps on the same coordinate
/// are rejected.
pub fn apply_all(problem: &Problem, interventions: &[Intervention]) -> Result<Submodel> {
    let mut current = problem.clone();
    for intervention in interventions {
        current = apply_one(&current, intervention)?;
    }
    Ok(Submodel {
        base: problem.clone(),
        interventions: interventions.to_vec(),
        intervened: current,
    })
}

fn apply_one(problem: &Problem, intervention: &Intervention) -> Result<Problem> {
    match intervention {
        Intervention::ClampVariable { index, value } => {
            let (lo, hi) = problem.set().coordinate_bounds(*index).map_err(|_| {
                CviError::InvalidIntervention(format!(
                    "clamp index {index} out of range for dimension {}",
                    problem.dim()
                ))
            })?;
            if problem.set().fixed().iter().any(|(i, _)| i == index) {
                return Err(CviError::ConflictingClamp(*index));
            }
            if !(value.is_finite() && *value >= lo && *value <= hi) {
                return Err(CviError::InvalidIntervention(format!(
                    "clamp value {value} for coordinate {index} is outside its bounds [{lo}, {hi}]"
                )));
            }
            let set = FeasibleSet::with_fixed(problem.set().clone(), vec![(*index, *value)])?;
            problem.with_parts(problem.mapping().clone(), set)
        }
        Intervention::ShiftConstant {
            coordinate_index,
            delta,
        } => {
            let mapping = problem
                .mapping()
                .shift_constant(*coordinate_index, *delta)?;
            problem.with_parts(mapping, problem.set().clone())
        }
        Intervention::ReplaceComponent {
            component_index,
            new_mapping,
        } => {
            let mapping = problem
                .mapping()
                .replace_component(*component_index, new_mapping.clone())?;
            problem.with_parts(mapping, problem.set().clone())
        }
        Intervention::SetNoise {
            component_index,
            noise,
        } => {
            let mapping = problem
                .mapping()
                .set_component_noise(*component_index, noise.clone())?;
            problem.with_parts(mapping, problem.set().clone())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrrelevanceReport {
    pub mappings_equal: bool,
    pub max_gap: f64,
    /// Whether both submodels share the same feasible set.
    pub sets_equal: bool,
}

impl IrrelevanceReport {
    /// Both submodels pose the same VI, so they share solutions.
    pub fn irrelevant(&self) -> bool {
        self.mappings_equal && self.sets_equal
    }
}

/// Compares the mean fields induced by two interventions at sampled
/// feasible points of the base model.
pub fn irrelevance_check(
    problem: &Problem,
    first: &Intervention,
    second: &Intervention,
    sample_points: usize,
    seed: u64,
) -> Result<IrrelevanceReport> {
    let a = apply(problem, first)?.intervened;
    let b = apply(problem, second)?.intervened;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_gap: f64 = 0.0;
    for _ in 0..sample_points {
        let x = problem.set().sample(&mut rng, DEFAULT_SAMPLE_SCALE)?;
        let gap = (a.evaluate(&x)? - b.evaluate(&x)?).amax();
        max_gap = max_gap.max(gap);
    }
    Ok(IrrelevanceReport {
        mappings_equal: max_gap <= IRRELEVANCE_TOL,
        max_gap,
        sets_equal: a.set() == b.set(),
    })
}
