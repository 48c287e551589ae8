use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CviError, Result};
use crate::intervention::Intervention;
use crate::problem::Problem;

/// Probability of drawing a flagged component, on top of the uniform share,
/// when priorities are in use.
pub const DEFAULT_PRIORITY_MASS: f64 = 0.5;

/// Distribution over the constraint components `K_i` used by the two-step
/// incremental method. Every component keeps probability at least `rho / m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSampler {
    probabilities: Vec<f64>,
    rho: f64,
}

impl ConstraintSampler {
    pub fn uniform(components: usize) -> Self {
        ConstraintSampler {
            probabilities: vec![1.0 / components as f64; components],
            rho: 1.0,
        }
    }

    /// Mixture `(1 - p) uniform + p priority`, where the priority mass is
    /// spread evenly over the flagged components, then blended towards
    /// uniform if needed so that no component falls below `rho / m`.
    pub fn prioritized(flagged: &[bool], priority_mass: f64, rho: f64) -> Result<Self> {
        let m = flagged.len();
        if m == 0 {
            return Err(CviError::InvalidSchedule("sampler over zero components".into()));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(CviError::InvalidSchedule(format!("rho must lie in (0, 1], got {rho}")));
        }
        if !(0.0..=1.0).contains(&priority_mass) {
            return Err(CviError::InvalidSchedule(format!(
                "priority mass must lie in [0, 1], got {priority_mass}"
            )));
        }
        let count = flagged.iter().filter(|f| **f).count();
        let uniform = 1.0 / m as f64;
        let mut probabilities: Vec<f64> = flagged
            .iter()
            .map(|&f| {
                let boost = if count == 0 {
                    uniform
                } else if f {
                    1.0 / count as f64
                } else {
                    0.0
                };
                (1.0 - priority_mass) * uniform + priority_mass * boost
            })
            .collect();
        let floor = rho / m as f64;
        let lowest = probabilities.iter().copied().fold(f64::INFINITY, f64::min);
        if lowest < floor {
            let t = (floor - lowest) / (uniform - lowest);
            for p in &mut probabilities {
                *p = t * uniform + (1.0 - t) * *p;
            }
        }
        Ok(ConstraintSampler { probabilities, rho })
    }

    /// Flags the constraint components of `problem` whose coordinates overlap
    /// a mapping block touched by one of `interventions`.
    pub fn for_interventions(problem: &Problem, interventions: &[Intervention]) -> Result<Self> {
        let touched: Vec<Range<usize>> = interventions
            .iter()
            .filter_map(|i| touched_range(problem, i))
            .collect();
        let components = problem.set().components();
        let flagged: Vec<bool> = components
            .iter()
            .map(|(range, _)| touched.iter().any(|t| t.start < range.end && range.start < t.end))
            .collect();
        if flagged.iter().any(|f| *f) {
            Self::prioritized(&flagged, DEFAULT_PRIORITY_MASS, 1.0 - DEFAULT_PRIORITY_MASS)
        } else {
            Ok(Self::uniform(components.len()))
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn components(&self) -> usize {
        self.probabilities.len()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        for (i, p) in self.probabilities.iter().enumerate() {
            cumulative += p;
            if u < cumulative {
                return i;
            }
        }
        self.probabilities.len() - 1
    }
}

/// Output coordinates whose mapping is modified by `intervention`.
pub fn touched_range(problem: &Problem, intervention: &Intervention) -> Option<Range<usize>> {
    let ranges = problem.mapping().component_ranges();
    match intervention {
        Intervention::ClampVariable { index, .. } => Some(*index..index + 1),
        Intervention::ShiftConstant {
            coordinate_index, ..
        } => Some(*coordinate_index..coordinate_index + 1),
        Intervention::ReplaceComponent {
            component_index, ..
        }
        | Intervention::SetNoise {
            component_index, ..
        } => ranges.get(*component_index).cloned(),
    }
}
