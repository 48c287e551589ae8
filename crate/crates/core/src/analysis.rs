//! Intervention effects: sensitivity bound, directional inequalities,
//! per-component localization and complementarity gaps.

use std::ops::Range;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{CviError, Result};
use crate::intervention::{apply_all, Intervention};
use crate::mapping::{certified_constants, check_properties, Mapping};
use crate::point::{check_dim, Point};
use crate::problem::Problem;
use crate::solvers::{solve, SolverConfig};

/// Samples used to estimate `mu` when the mapping is not affine.
pub const MU_SAMPLES: usize = 64;
pub const MU_SEED: u64 = 0;
/// An inner product counts as strictly negative below this value.
pub const STRICT_TOL: f64 = -1e-12;
/// Displacements at or below this norm are treated as "no effect".
pub const EFFECT_TOL: f64 = 1e-6;
pub const COMPLEMENTARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Directional {
    /// `<F1(x1) - F0(x1), x1 - x0>`, negative whenever the solutions differ.
    pub first: f64,
    /// `<F1(x1) - F0(x0), x1 - x0>`, nonpositive.
    pub second: f64,
    pub first_negative: bool,
    pub second_nonpositive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentEffectReport {
    pub x0: Point,
    pub x1: Point,
    pub effect_norm: f64,
    /// `(1 / mu) |F1(x1) - F0(x1)|`.
    pub bound: f64,
    pub mu_used: f64,
    /// True when `mu_used` is the exact modulus of an affine mapping.
    pub mu_certified: bool,
    pub bound_satisfied: bool,
    pub directional: Directional,
    /// `<F1_i(x1) - F0_i(x1), x1_i - x0_i>` for every component of the
    /// mapping (a single entry when the mapping is not partitioned).
    pub per_component: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentEffect {
    pub component: usize,
    pub contribution: f64,
    /// Whether the intervention modifies this component's mapping.
    pub treated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// Components ordered by decreasing `|contribution|`.
    pub ranked: Vec<ComponentEffect>,
    pub total: f64,
    pub report: TreatmentEffectReport,
}

/// Strong monotonicity modulus of `mapping` over the problem's set: exact for
/// affine mappings, sampled otherwise.
pub fn strong_monotonicity(problem: &Problem) -> Result<(f64, bool)> {
    if let Some(c) = certified_constants(problem.mapping()) {
        return Ok((c.mu, true));
    }
    let report = check_properties(problem.mapping(), problem.set(), MU_SAMPLES, MU_SEED)?;
    Ok((report.mu_estimate, false))
}

fn solve_converged(problem: &Problem, config: &SolverConfig, which: &str) -> Result<DVector<f64>> {
    let solution = solve(problem, config)?;
    if !solution.converged {
        return Err(CviError::SolveNotConverged {
            which: which.to_string(),
            residual: solution.residual,
        });
    }
    Ok(solution.point.into_vector())
}

/// Solves the untreated and intervened problems with the same configuration
/// and compares the solutions against the `mu`-based sensitivity bound.
///
/// Clamps change the feasible set, so the bound does not apply to them;
/// solve the clamped submodel directly instead.
pub fn treatment_effect(
    problem: &Problem,
    intervention: &Intervention,
    config: &SolverConfig,
) -> Result<TreatmentEffectReport> {
    treatment_effect_all(problem, std::slice::from_ref(intervention), config)
}

/// [`treatment_effect`] for several interventions applied left to right.
pub fn treatment_effect_all(
    problem: &Problem,
    interventions: &[Intervention],
    config: &SolverConfig,
) -> Result<TreatmentEffectReport> {
    if let Some(clamp) = interventions.iter().find(|i| !i.is_mapping_type()) {
        return Err(CviError::UnsupportedAnalysis(format!(
            "{clamp} changes the feasible set; solve the clamped submodel and compare solutions directly"
        )));
    }
    let (mu, certified) = strong_monotonicity(problem)?;
    if !(mu > 0.0) {
        return Err(CviError::NotStronglyMonotone { mu });
    }
    let treated = apply_all(problem, interventions)?.intervened;
    let x0 = solve_converged(problem, config, "untreated")?;
    let x1 = solve_converged(&treated, config, "treated")?;
    effect_report(problem.mapping(), treated.mapping(), x0, x1, mu, certified)
}

/// Builds the report from two given solutions of `VI(F0, K)` and `VI(F1, K)`.
pub fn effect_report(
    f0: &Mapping,
    f1: &Mapping,
    x0: DVector<f64>,
    x1: DVector<f64>,
    mu: f64,
    mu_certified: bool,
) -> Result<TreatmentEffectReport> {
    check_dim(f0.input_dim(), x0.len())?;
    check_dim(f1.input_dim(), x1.len())?;
    if !(mu > 0.0) {
        return Err(CviError::NotStronglyMonotone { mu });
    }
    let f0_x1 = f0.evaluate(&x1)?;
    let f0_x0 = f0.evaluate(&x0)?;
    let f1_x1 = f1.evaluate(&x1)?;
    let displacement = &x1 - &x0;
    let effect_norm = displacement.norm();
    let change = &f1_x1 - &f0_x1;
    let bound = change.norm() / mu;

    let first = change.dot(&displacement);
    let second = (&f1_x1 - &f0_x0).dot(&displacement);
    // Solutions are only accurate to the solver tolerance, so the
    // non-strict comparisons carry a slack scaled by the field magnitude.
    let scale = 1.0 + f1_x1.norm() + f0_x0.norm();
    let slack = 1e-8 * scale;
    let differs = effect_norm > EFFECT_TOL;
    let directional = Directional {
        first,
        second,
        first_negative: !differs || first < STRICT_TOL,
        second_nonpositive: second <= slack,
    };
    let bound_satisfied = effect_norm <= bound * (1.0 + 1e-6) + slack / mu;

    let ranges: Vec<Range<usize>> = match f0.components() {
        Some(_) => f0.component_ranges(),
        None => vec![0..x0.len()],
    };
    let per_component = ranges
        .iter()
        .map(|r| change.rows(r.start, r.len()).dot(&displacement.rows(r.start, r.len())))
        .collect();

    let mut warnings = Vec::new();
    if !bound_satisfied {
        warnings.push(format!(
            "effect {effect_norm:.6e} exceeds bound {bound:.6e} with {} mu = {mu:.6e}",
            if mu_certified { "certified" } else { "estimated" }
        ));
    }
    if !directional.first_negative {
        warnings.push(format!("first directional product {first:.6e} is not negative"));
    }
    if !directional.second_nonpositive {
        warnings.push(format!("second directional product {second:.6e} is positive"));
    }
    Ok(TreatmentEffectReport {
        x0: Point::from_vector(x0)?,
        x1: Point::from_vector(x1)?,
        effect_norm,
        bound,
        mu_used: mu,
        mu_certified,
        bound_satisfied,
        directional,
        per_component,
        warnings,
    })
}

/// Components whose mapping is modified by `intervention`.
pub fn treated_components(mapping: &Mapping, intervention: &Intervention) -> Vec<usize> {
    let ranges = mapping.component_ranges();
    match intervention {
        Intervention::ClampVariable { .. } => Vec::new(),
        Intervention::ShiftConstant {
            coordinate_index,
            delta,
        } => {
            if *delta == 0.0 {
                return Vec::new();
            }
            ranges
                .iter()
                .position(|r| r.contains(coordinate_index))
                .into_iter()
                .collect()
        }
        Intervention::ReplaceComponent {
            component_index, ..
        }
        | Intervention::SetNoise {
            component_index, ..
        } => vec![*component_index],
    }
}

/// Splits the first directional product into per-component contributions
/// and ranks them by magnitude.
pub fn localize_effects(
    problem: &Problem,
    intervention: &Intervention,
    config: &SolverConfig,
) -> Result<Localization> {
    localize_effects_all(problem, std::slice::from_ref(intervention), config)
}

pub fn localize_effects_all(
    problem: &Problem,
    interventions: &[Intervention],
    config: &SolverConfig,
) -> Result<Localization> {
    if problem.mapping().components().is_none() {
        return Err(CviError::NotPartitioned);
    }
    let report = treatment_effect_all(problem, interventions, config)?;
    Ok(rank_components(problem.mapping(), interventions, report))
}

/// Orders the report's per-component contributions by decreasing magnitude.
pub fn rank_components(
    mapping: &Mapping,
    interventions: &[Intervention],
    report: TreatmentEffectReport,
) -> Localization {
    let treated: Vec<usize> = interventions
        .iter()
        .flat_map(|i| treated_components(mapping, i))
        .collect();
    let mut ranked: Vec<ComponentEffect> = report
        .per_component
        .iter()
        .enumerate()
        .map(|(component, &contribution)| ComponentEffect {
            component,
            contribution,
            treated: treated.contains(&component),
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.contribution
            .abs()
            .total_cmp(&a.contribution.abs())
            .then(a.component.cmp(&b.component))
    });
    Localization {
        total: report.per_component.iter().sum(),
        ranked,
        report,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityGap {
    /// `<F(x), x>`.
    pub gap: f64,
    /// `F(x) >= -tol`.
    pub feasible_f: bool,
    /// `x >= -tol`.
    pub feasible_x: bool,
}

impl ComplementarityGap {
    pub fn solves_ncp(&self) -> bool {
        self.feasible_f && self.feasible_x && self.gap.abs() <= COMPLEMENTARITY_TOL
    }
}

pub fn complementarity_gap(x: &Point, mapping: &Mapping) -> Result<ComplementarityGap> {
    check_dim(mapping.input_dim(), x.dim())?;
    let f = mapping.evaluate(x.as_vector())?;
    Ok(ComplementarityGap {
        gap: f.dot(x.as_vector()),
        feasible_f: f.iter().all(|v| *v >= -COMPLEMENTARITY_TOL),
        feasible_x: x.iter().all(|v| *v >= -COMPLEMENTARITY_TOL),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_lcp, skew_saddle};
    use crate::problem::Algorithm;
    use crate::solvers::SolveOptions;
    use nalgebra::DMatrix;

    fn lcp() -> Problem {
        build_lcp(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]), vec![-1.0, -1.0]).unwrap()
    }

    fn config() -> SolverConfig {
        SolverConfig::new(Algorithm::Projection).with_options(SolveOptions::default().with_tol(1e-11))
    }

    #[test]
    fn gap_at_lcp_solution() {
        let x = Point::new(vec![1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let g = complementarity_gap(&x, lcp().mapping()).unwrap();
        assert!(g.gap.abs() <= 1e-9);
        assert!(g.solves_ncp());
    }

    #[test]
    fn negative_field_detected() {
        let g = complementarity_gap(&Point::zeros(2), lcp().mapping()).unwrap();
        assert_eq!(g.gap, 0.0);
        assert!(!g.feasible_f);
        assert!(!g.solves_ncp());
    }

    #[test]
    fn null_shift_has_no_effect() {
        let i = Intervention::ShiftConstant {
            coordinate_index: 0,
            delta: 0.0,
        };
        let r = treatment_effect(&lcp(), &i, &config()).unwrap();
        assert_eq!(r.effect_norm, 0.0);
        assert_eq!(r.bound, 0.0);
        assert!(r.bound_satisfied && r.warnings.is_empty());
    }

    #[test]
    fn shift_respects_bound() {
        let i = Intervention::ShiftConstant {
            coordinate_index: 1,
            delta: -2.0,
        };
        let r = treatment_effect(&lcp(), &i, &config()).unwrap();
        assert!(r.mu_certified);
        assert!((r.mu_used - 1.0).abs() < 1e-12);
        assert!(r.effect_norm > 0.1);
        assert!(r.bound_satisfied);
        assert!(r.directional.first < 0.0 && r.directional.second <= 1e-9);
    }

    #[test]
    fn clamp_refused() {
        let i = Intervention::ClampVariable { index: 0, value: 0.0 };
        assert!(matches!(
            treatment_effect(&lcp(), &i, &config()),
            Err(CviError::UnsupportedAnalysis(_))
        ));
    }

    #[test]
    fn merely_monotone_refused() {
        let i = Intervention::ShiftConstant {
            coordinate_index: 0,
            delta: 0.5,
        };
        assert!(matches!(
            treatment_effect(&skew_saddle(), &i, &config()),
            Err(CviError::NotStronglyMonotone { .. })
        ));
    }

    #[test]
    fn localization_needs_partition() {
        let i = Intervention::ShiftConstant {
            coordinate_index: 0,
            delta: 0.5,
        };
        assert!(matches!(localize_effects(&lcp(), &i, &config()), Err(CviError::NotPartitioned)));
    }
}
