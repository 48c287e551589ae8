//! The problem spec file: a JSON document describing a model, its noise,
//! interventions and solver settings. See the README for the schema.

use std::fmt;
use std::path::Path;

use cvi::mapping::NoiseModel;
use cvi::models::{build_braess, build_economy, build_lcp, build_saddle, skew_saddle, BraessSpec, EconomySpec};
use cvi::{Algorithm, FeasibleSet, Intervention, Mapping, Problem, SolveOptions, SolverConfig, StepSchedule};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpecFile {
    pub model: ModelSpec,
    /// Only allowed with an `affine` model; built-in models carry their own set.
    #[serde(default)]
    pub set: Option<SetSpec>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub interventions: Vec<InterventionSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Braess(BraessSpec),
    /// The printed two-provider instance; takes no parameters.
    #[serde(rename = "economy_2x1x2")]
    Economy2x1x2(Empty),
    Economy(Box<EconomySpec>),
    Lcp { matrix: Vec<Vec<f64>>, q: Vec<f64> },
    /// `f(u, v) = u^T A v` over a box; the unit skew saddle when `a` is absent.
    Saddle(SaddleSpec),
    Affine { matrix: Vec<Vec<f64>>, constant: Vec<f64> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Empty {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaddleSpec {
    #[serde(default)]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub lower: Option<Vec<f64>>,
    #[serde(default)]
    pub upper: Option<Vec<f64>>,
}

/// `null` bounds stand for an infinite bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Orthant(Empty),
    Box {
        lower: Vec<Option<f64>>,
        upper: Vec<Option<f64>>,
    },
    Simplex {
        radius: f64,
    },
    Polyhedron {
        matrix: Vec<Vec<f64>>,
        rhs: Vec<f64>,
        #[serde(default = "yes")]
        nonnegative: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stddev {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Stddev {
    fn expand(&self, n: usize) -> CliResult<Vec<f64>> {
        match self {
            Stddev::Scalar(s) => Ok(vec![*s; n]),
            Stddev::Vector(v) if v.len() == n => Ok(v.clone()),
            Stddev::Vector(v) => Err(CliError::Input(format!(
                "noise stddev has {} entries, expected {n}",
                v.len()
            ))),
        }
    }
}

/// Zero-mean Gaussian noise on every output. Block `i` of a partitioned
/// mapping draws with seed `seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub stddev: Stddev,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InterventionSpec {
    Clamp {
        index: usize,
        value: f64,
    },
    Shift {
        index: usize,
        delta: f64,
    },
    Noise {
        component: usize,
        stddev: Stddev,
        #[serde(default)]
        seed: u64,
    },
    Replace {
        component: usize,
        matrix: Vec<Vec<f64>>,
        constant: Vec<f64>,
    },
}

impl fmt::Display for InterventionSpec {
    /// The `--do` form; replacement matrices are not echoed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterventionSpec::Clamp { index, value } => write!(f, "clamp:index={index},value={value}"),
            InterventionSpec::Shift { index, delta } => write!(f, "shift:index={index},delta={delta}"),
            InterventionSpec::Noise {
                component,
                stddev: Stddev::Scalar(s),
                seed,
            } => write!(f, "noise:component={component},stddev={s},seed={seed}"),
            InterventionSpec::Noise {
                component,
                stddev: Stddev::Vector(v),
                seed,
            } => write!(f, "noise:component={component},stddev={v:?},seed={seed}"),
            InterventionSpec::Replace { component, .. } => write!(f, "replace:component={component}"),
        }
    }
}

impl InterventionSpec {
    pub fn build(&self, problem: &Problem) -> CliResult<Intervention> {
        Ok(match self {
            InterventionSpec::Clamp { index, value } => Intervention::ClampVariable {
                index: *index,
                value: *value,
            },
            InterventionSpec::Shift { index, delta } => Intervention::ShiftConstant {
                coordinate_index: *index,
                delta: *delta,
            },
            InterventionSpec::Noise {
                component,
                stddev,
                seed,
            } => {
                let ranges = problem.mapping().component_ranges();
                let range = ranges.get(*component).ok_or_else(|| {
                    CliError::Input(format!(
                        "noise intervention: component {component} out of range ({} components)",
                        ranges.len()
                    ))
                })?;
                Intervention::SetNoise {
                    component_index: *component,
                    noise: NoiseModel::gaussian(stddev.expand(range.len())?, *seed)?,
                }
            }
            InterventionSpec::Replace {
                component,
                matrix,
                constant,
            } => Intervention::ReplaceComponent {
                component_index: *component,
                new_mapping: Mapping::affine(to_matrix("replace.matrix", matrix)?, constant.clone())?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    /// Picked from the problem's sampled constants when absent.
    #[serde(default)]
    pub schedule: Option<StepSchedule>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

fn default_algorithm() -> Algorithm {
    Algorithm::Projection
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            algorithm: default_algorithm(),
            schedule: None,
            tol: None,
            max_iter: None,
            seed: None,
            x0: None,
        }
    }
}

impl ProblemSpecFile {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn model_name(&self) -> &'static str {
        match self.model {
            ModelSpec::Braess(_) => "braess",
            ModelSpec::Economy2x1x2(_) => "economy_2x1x2",
            ModelSpec::Economy(_) => "economy",
            ModelSpec::Lcp { .. } => "lcp",
            ModelSpec::Saddle(_) => "saddle",
            ModelSpec::Affine { .. } => "affine",
        }
    }

    pub fn is_braess(&self) -> bool {
        matches!(self.model, ModelSpec::Braess(_))
    }

    /// The model with its noise, before any intervention.
    pub fn build_problem(&self) -> CliResult<Problem> {
        let problem = match &self.model {
            ModelSpec::Braess(spec) => build_braess(spec)?,
            ModelSpec::Economy2x1x2(_) => build_economy(&EconomySpec::two_provider_instance())?,
            ModelSpec::Economy(spec) => build_economy(spec)?,
            ModelSpec::Lcp { matrix, q } => build_lcp(to_matrix("model.lcp.matrix", matrix)?, q.clone())?,
            ModelSpec::Saddle(s) => match (&s.a, &s.lower, &s.upper) {
                (None, None, None) => skew_saddle(),
                (Some(a), Some(lower), Some(upper)) => {
                    build_saddle(to_matrix("model.saddle.a", a)?, lower.clone(), upper.clone())?
                }
                _ => {
                    return Err(CliError::Input(
                        "model.saddle: give all of a, lower, upper or none of them".into(),
                    ))
                }
            },
            ModelSpec::Affine { matrix, constant } => {
                let mapping = Mapping::affine(to_matrix("model.affine.matrix", matrix)?, constant.clone())?;
                let set = self
                    .set
                    .as_ref()
                    .ok_or_else(|| CliError::Input("an affine model needs a \"set\"".into()))?;
                Problem::new(mapping, build_set(set, constant.len())?)?
            }
        };
        if self.set.is_some() && !matches!(self.model, ModelSpec::Affine { .. }) {
            return Err(CliError::Input(format!(
                "\"set\" is only allowed with an affine model; {} defines its own",
                self.model_name()
            )));
        }
        match &self.noise {
            None => Ok(problem),
            Some(noise) => with_noise(problem, noise),
        }
    }

    pub fn interventions(&self, problem: &Problem) -> CliResult<Vec<Intervention>> {
        self.interventions.iter().map(|i| i.build(problem)).collect()
    }
}

fn with_noise(problem: Problem, noise: &NoiseSpec) -> CliResult<Problem> {
    let mut mapping = problem.mapping().clone();
    for (i, range) in problem.mapping().component_ranges().into_iter().enumerate() {
        let law = NoiseModel::gaussian(noise.stddev.expand(range.len())?, noise.seed.wrapping_add(i as u64))?;
        mapping = mapping.set_component_noise(i, law)?;
    }
    let labels = problem.labels().map(|l| l.to_vec());
    let noisy = Problem::new(mapping, problem.set().clone())?;
    Ok(match labels {
        Some(l) => noisy.with_labels(l)?,
        None => noisy,
    })
}

fn build_set(spec: &SetSpec, n: usize) -> CliResult<FeasibleSet> {
    let bound = |v: &[Option<f64>], inf: f64| v.iter().map(|b| b.unwrap_or(inf)).collect::<Vec<_>>();
    Ok(match spec {
        SetSpec::Orthant(_) => FeasibleSet::orthant(n),
        SetSpec::Box { lower, upper } => {
            FeasibleSet::boxed(bound(lower, f64::NEG_INFINITY), bound(upper, f64::INFINITY))?
        }
        SetSpec::Simplex { radius } => FeasibleSet::simplex(*radius, n)?,
        SetSpec::Polyhedron {
            matrix,
            rhs,
            nonnegative,
        } => FeasibleSet::polyhedron(to_matrix("set.polyhedron.matrix", matrix)?, rhs.clone(), *nonnegative)?,
    })
}

fn to_matrix(field: &str, rows: &[Vec<f64>]) -> CliResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(CliError::Input(format!("{field}: matrix is empty")));
    }
    if let Some(r) = rows.iter().position(|r| r.len() != ncols) {
        return Err(CliError::Input(format!(
            "{field}: row {r} has {} entries, expected {ncols}",
            rows[r].len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Solver settings after command-line overrides. Seed precedence: flag,
/// then the spec file, then `CVI_SEED`, then 0.
#[derive(Debug, Clone, Default)]
pub struct SolveFlags {
    pub algorithm: Option<Algorithm>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
}

pub const SEED_ENV: &str = "CVI_SEED";

pub fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Input(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

impl SolverSpec {
    pub fn config(&self, flags: &SolveFlags) -> CliResult<SolverConfig> {
        let mut options = SolveOptions::default();
        if let Some(tol) = flags.tol.or(self.tol) {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Input(format!("tolerance must be positive, got {tol}")));
            }
            options.tol = tol;
        }
        if let Some(max_iter) = flags.max_iter.or(self.max_iter) {
            options.max_iter = max_iter;
        }
        options.x0 = self.x0.clone();
        let seed = match flags.seed.or(self.seed) {
            Some(s) => s,
            None => env_seed()?.unwrap_or(0),
        };
        let mut config = SolverConfig::new(flags.algorithm.unwrap_or(self.algorithm))
            .with_options(options)
            .with_seed(seed);
        config.schedule = self.schedule;
        Ok(config)
    }
}
