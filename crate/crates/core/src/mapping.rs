//! Vector fields `F : R^n -> R^n` and their diagnostics.
//!
//! A mapping is the mean field `E[F(x, eta)]`. Stochastic mappings add
//! per-component Gaussian noise `F(x, eta) = F(x) + eta`; sampled draws are a
//! pure function of `(seed, draw_index, x)`.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CviError, Result};
use crate::linalg;
use crate::point::check_dim;
use crate::sets::{FeasibleSet, DEFAULT_SAMPLE_SCALE};

pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const SYMMETRY_TOL: f64 = 1e-8;
pub const MONOTONE_TOL: f64 = 1e-10;

type Evaluator = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Mapping {
    /// `Mx + c`; `M` may be rectangular when used as a component.
    Affine {
        matrix: DMatrix<f64>,
        constant: DVector<f64>,
    },
    Partitioned(Vec<Component>),
    Stochastic {
        base: Box<Mapping>,
        noise: NoiseModel,
    },
    Callable(CallableMapping),
}

/// One block `F_i` of a partitioned mapping. It reads the full point and
/// writes the coordinates in `range`.
#[derive(Clone, Debug)]
pub struct Component {
    pub range: Range<usize>,
    pub mapping: Mapping,
}

#[derive(Clone)]
pub struct CallableMapping {
    input_dim: usize,
    output_dim: usize,
    label: String,
    evaluator: Evaluator,
}

impl fmt::Debug for CallableMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallableMapping")
            .field("label", &self.label)
            .field("input_dim", &self.input_dim)
            .field("output_dim", &self.output_dim)
            .finish_non_exhaustive()
    }
}

impl fmt::Debug for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mapping::Affine { matrix, constant } => f
                .debug_struct("Affine")
                .field("matrix", matrix)
                .field("constant", constant)
                .finish(),
            Mapping::Partitioned(c) => f.debug_tuple("Partitioned").field(c).finish(),
            Mapping::Stochastic { base, noise } => f
                .debug_struct("Stochastic")
                .field("base", base)
                .field("noise", noise)
                .finish(),
            Mapping::Callable(c) => c.fmt(f),
        }
    }
}

/// Additive Gaussian noise with per-component mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    mean: Vec<f64>,
    stddev: Vec<f64>,
    seed: u64,
}

impl NoiseModel {
    pub fn gaussian(stddev: Vec<f64>, seed: u64) -> Result<Self> {
        let mean = vec![0.0; stddev.len()];
        Self::with_mean(mean, stddev, seed)
    }

    pub fn with_mean(mean: Vec<f64>, stddev: Vec<f64>, seed: u64) -> Result<Self> {
        check_dim(mean.len(), stddev.len())?;
        if mean.iter().any(|m| !m.is_finite()) || stddev.iter().any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(CviError::InvalidMapping(
                "noise needs finite means and nonnegative finite standard deviations".into(),
            ));
        }
        Ok(NoiseModel { mean, stddev, seed })
    }

    pub fn dim(&self) -> usize {
        self.stddev.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn stddev(&self) -> &[f64] {
        &self.stddev
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One realization of `eta`; reproducible for a given `(seed, draw_index)`.
    pub fn sample(&self, draw_index: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(draw_index);
        DVector::from_iterator(
            self.dim(),
            self.mean.iter().zip(&self.stddev).map(|(m, s)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                m + s * z
            }),
        )
    }
}

impl Mapping {
    pub fn affine(matrix: DMatrix<f64>, constant: Vec<f64>) -> Result<Self> {
        check_dim(matrix.nrows(), constant.len())?;
        if matrix.iter().chain(constant.iter()).any(|v| !v.is_finite()) {
            return Err(CviError::InvalidMapping("non-finite affine coefficients".into()));
        }
        Ok(Mapping::Affine {
            matrix,
            constant: DVector::from_vec(constant),
        })
    }

    /// Ranges must partition `0..n_out`; every component reads the same input.
    pub fn partitioned(mut components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(CviError::InvalidMapping("partitioned mapping without components".into()));
        }
        components.sort_by_key(|c| c.range.start);
        let input = components[0].mapping.input_dim();
        let mut next = 0;
        for c in &components {
            if c.range.start != next || c.range.len() != c.mapping.output_dim() {
                return Err(CviError::InvalidMapping(format!(
                    "component range {:?} does not fit (output dimension {})",
                    c.range,
                    c.mapping.output_dim()
                )));
            }
            check_dim(input, c.mapping.input_dim())?;
            next = c.range.end;
        }
        Ok(Mapping::Partitioned(components))
    }

    pub fn stochastic(base: Mapping, noise: NoiseModel) -> Result<Self> {
        check_dim(base.output_dim(), noise.dim())?;
        Ok(Mapping::Stochastic {
            base: Box::new(base),
            noise,
        })
    }

    pub fn callable<F>(input_dim: usize, output_dim: usize, label: &str, f: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        Mapping::Callable(CallableMapping {
            input_dim,
            output_dim,
            label: label.to_string(),
            evaluator: Arc::new(f),
        })
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Mapping::Affine { matrix, .. } => matrix.ncols(),
            Mapping::Partitioned(c) => c[0].mapping.input_dim(),
            Mapping::Stochastic { base, .. } => base.input_dim(),
            Mapping::Callable(c) => c.input_dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Mapping::Affine { matrix, .. } => matrix.nrows(),
            Mapping::Partitioned(c) => c.last().map_or(0, |c| c.range.end),
            Mapping::Stochastic { base, .. } => base.output_dim(),
            Mapping::Callable(c) => c.output_dim,
        }
    }

    /// Mean field `E[F(x, eta)]`.
    pub fn evaluate(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.input_dim(), x.len())?;
        Ok(self.eval_unchecked(x, None))
    }

    /// One realization `F(x, eta_draw)`; deterministic mappings return their
    /// mean value.
    pub fn evaluate_sample(&self, x: &DVector<f64>, draw_index: u64) -> Result<DVector<f64>> {
        check_dim(self.input_dim(), x.len())?;
        Ok(self.eval_unchecked(x, Some(draw_index)))
    }

    fn eval_unchecked(&self, x: &DVector<f64>, draw: Option<u64>) -> DVector<f64> {
        match self {
            Mapping::Affine { matrix, constant } => matrix * x + constant,
            Mapping::Partitioned(components) => {
                let mut out = DVector::zeros(self.output_dim());
                for c in components {
                    let part = c.mapping.eval_unchecked(x, draw);
                    out.rows_mut(c.range.start, c.range.len()).copy_from(&part);
                }
                out
            }
            Mapping::Stochastic { base, noise } => {
                let value = base.eval_unchecked(x, draw);
                match draw {
                    Some(index) => value + noise.sample(index),
                    None => value + DVector::from_column_slice(&noise.mean),
                }
            }
            Mapping::Callable(c) => {
                let value = (c.evaluator)(x);
                assert_eq!(
                    value.len(),
                    c.output_dim,
                    "callable mapping '{}' returned the wrong dimension",
                    c.label
                );
                value
            }
        }
    }

    /// Jacobian of the mean field. Affine pieces are exact; everything else
    /// uses central differences with step `h`.
    pub fn jacobian(&self, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>> {
        check_dim(self.input_dim(), x.len())?;
        if !(h > 0.0) {
            return Err(CviError::InvalidMapping(format!("finite-difference step must be positive, got {h}")));
        }
        Ok(self.jacobian_unchecked(x, h))
    }

    fn jacobian_unchecked(&self, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
        match self {
            Mapping::Affine { matrix, .. } => matrix.clone(),
            Mapping::Stochastic { base, .. } => base.jacobian_unchecked(x, h),
            Mapping::Partitioned(components) => {
                let mut out = DMatrix::zeros(self.output_dim(), self.input_dim());
                for c in components {
                    let part = c.mapping.jacobian_unchecked(x, h);
                    out.rows_mut(c.range.start, c.range.len()).copy_from(&part);
                }
                out
            }
            Mapping::Callable(_) => {
                let n = x.len();
                let mut out = DMatrix::zeros(self.output_dim(), n);
                let mut probe = x.clone();
                for j in 0..n {
                    probe[j] = x[j] + h;
                    let forward = self.eval_unchecked(&probe, None);
                    probe[j] = x[j] - h;
                    let backward = self.eval_unchecked(&probe, None);
                    probe[j] = x[j];
                    out.set_column(j, &((forward - backward) / (2.0 * h)));
                }
                out
            }
        }
    }

    /// `(M, c)` with `F(x) = Mx + c` when the mean field is affine.
    pub fn as_affine(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        match self {
            Mapping::Affine { matrix, constant } => Some((matrix.clone(), constant.clone())),
            Mapping::Stochastic { base, noise } => base
                .as_affine()
                .map(|(m, c)| (m, c + DVector::from_column_slice(&noise.mean))),
            Mapping::Partitioned(components) => {
                let mut matrix = DMatrix::zeros(self.output_dim(), self.input_dim());
                let mut constant = DVector::zeros(self.output_dim());
                for comp in components {
                    let (m, c) = comp.mapping.as_affine()?;
                    matrix.rows_mut(comp.range.start, comp.range.len()).copy_from(&m);
                    constant.rows_mut(comp.range.start, comp.range.len()).copy_from(&c);
                }
                Some((matrix, constant))
            }
            Mapping::Callable(_) => None,
        }
    }

    pub fn components(&self) -> Option<&[Component]> {
        match self {
            Mapping::Partitioned(c) => Some(c),
            _ => None,
        }
    }

    /// Output ranges of the blocks `F_i`; a non-partitioned mapping is one block.
    pub fn component_ranges(&self) -> Vec<Range<usize>> {
        match self {
            Mapping::Partitioned(c) => c.iter().map(|c| c.range.clone()).collect(),
            other => vec![0..other.output_dim()],
        }
    }

    /// Adds `delta` to output coordinate `index`.
    pub fn shift_constant(&self, index: usize, delta: f64) -> Result<Mapping> {
        if index >= self.output_dim() {
            return Err(CviError::ComponentOutOfRange {
                index,
                count: self.output_dim(),
            });
        }
        if !delta.is_finite() {
            return Err(CviError::InvalidIntervention(format!("non-finite shift {delta}")));
        }
        Ok(match self {
            Mapping::Affine { matrix, constant } => {
                let mut constant = constant.clone();
                constant[index] += delta;
                Mapping::Affine {
                    matrix: matrix.clone(),
                    constant,
                }
            }
            Mapping::Partitioned(components) => {
                let mut components = components.clone();
                let c = components
                    .iter_mut()
                    .find(|c| c.range.contains(&index))
                    .expect("component ranges partition the output");
                c.mapping = c.mapping.shift_constant(index - c.range.start, delta)?;
                Mapping::Partitioned(components)
            }
            Mapping::Stochastic { base, noise } => Mapping::Stochastic {
                base: Box::new(base.shift_constant(index, delta)?),
                noise: noise.clone(),
            },
            Mapping::Callable(c) => {
                let inner = c.evaluator.clone();
                let label = format!("{}+shift[{index}]", c.label);
                Mapping::callable(c.input_dim, c.output_dim, &label, move |x| {
                    let mut value = inner(x);
                    value[index] += delta;
                    value
                })
            }
        })
    }

    /// Swaps block `index` for `replacement`. A non-partitioned mapping is
    /// treated as a single block 0.
    pub fn replace_component(&self, index: usize, replacement: Mapping) -> Result<Mapping> {
        let ranges = self.component_ranges();
        let range = ranges.get(index).ok_or(CviError::ComponentOutOfRange {
            index,
            count: ranges.len(),
        })?;
        check_dim(self.input_dim(), replacement.input_dim())?;
        if replacement.output_dim() != range.len() {
            return Err(CviError::InvalidIntervention(format!(
                "replacement for component {index} has output dimension {}, expected {}",
                replacement.output_dim(),
                range.len()
            )));
        }
        match self {
            Mapping::Partitioned(components) => {
                let mut components = components.clone();
                components[index].mapping = replacement;
                Ok(Mapping::Partitioned(components))
            }
            _ => Ok(replacement),
        }
    }

    /// Swaps the noise law of block `index`, wrapping a deterministic block
    /// in a stochastic one if needed.
    pub fn set_component_noise(&self, index: usize, noise: NoiseModel) -> Result<Mapping> {
        let ranges = self.component_ranges();
        let range = ranges.get(index).ok_or(CviError::ComponentOutOfRange {
            index,
            count: ranges.len(),
        })?;
        check_dim(range.len(), noise.dim())?;
        let renoise = |m: &Mapping| match m {
            Mapping::Stochastic { base, .. } => Mapping::Stochastic {
                base: base.clone(),
                noise: noise.clone(),
            },
            other => Mapping::Stochastic {
                base: Box::new(other.clone()),
                noise: noise.clone(),
            },
        };
        match self {
            Mapping::Partitioned(components) => {
                let mut components = components.clone();
                components[index].mapping = renoise(&components[index].mapping);
                Ok(Mapping::Partitioned(components))
            }
            other => Ok(renoise(other)),
        }
    }
}

/// Sample-based certificate of the structural properties that decide which
/// solver and which theory applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub symmetric: bool,
    pub positive_definite: bool,
    pub monotone: bool,
    pub mu_estimate: f64,
    pub lipschitz_estimate: f64,
    pub samples: usize,
    pub seed: u64,
    /// Exact constants for affine mappings: `lambda_min((M + M^T)/2)` and `|M|_2`.
    pub certified: Option<CertifiedConstants>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedConstants {
    pub mu: f64,
    pub lipschitz: f64,
}

impl PropertyReport {
    pub fn strongly_monotone(&self) -> bool {
        self.monotone && self.mu_estimate > 0.0
    }

    /// Whether the VI is equivalent to minimizing a convex potential.
    pub fn optimization_equivalent(&self) -> bool {
        self.symmetric && self.monotone
    }
}

pub fn certified_constants(mapping: &Mapping) -> Option<CertifiedConstants> {
    let (matrix, _) = mapping.as_affine()?;
    if !matrix.is_square() {
        return None;
    }
    Some(CertifiedConstants {
        mu: linalg::min_symmetric_eigenvalue(&matrix),
        lipschitz: linalg::spectral_norm(&matrix),
    })
}

pub fn check_properties(
    mapping: &Mapping,
    set: &FeasibleSet,
    samples: usize,
    seed: u64,
) -> Result<PropertyReport> {
    if samples < 2 {
        return Err(CviError::SamplingFailure(format!("need at least 2 samples, got {samples}")));
    }
    check_dim(mapping.input_dim(), set.dim())?;
    check_dim(mapping.output_dim(), set.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..samples)
        .map(|_| set.sample(&mut rng, DEFAULT_SAMPLE_SCALE))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| CviError::SamplingFailure(e.to_string()))?;

    let mut symmetric = true;
    let mut positive_definite = true;
    for x in &points {
        let jac = mapping.jacobian(x, DEFAULT_FD_STEP)?;
        let skew = &jac - jac.transpose();
        let skew_norm = skew
            .row_iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        symmetric &= skew_norm <= SYMMETRY_TOL;
        positive_definite &= linalg::min_symmetric_eigenvalue(&jac) > 0.0;
    }

    let values = points
        .iter()
        .map(|x| mapping.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    let mut monotone = true;
    let mut mu = f64::INFINITY;
    let mut lipschitz: f64 = 0.0;
    let mut pairs = 0usize;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dx = &points[i] - &points[j];
            let dist2 = dx.norm_squared();
            if dist2 < 1e-24 {
                continue;
            }
            let df = &values[i] - &values[j];
            let inner = df.dot(&dx);
            monotone &= inner >= -MONOTONE_TOL;
            mu = mu.min(inner / dist2);
            lipschitz = lipschitz.max(df.norm() / dist2.sqrt());
            pairs += 1;
        }
    }
    if pairs == 0 {
        // the set is a single point
        mu = 0.0;
    }
    Ok(PropertyReport {
        symmetric,
        positive_definite,
        monotone,
        mu_estimate: mu,
        lipschitz_estimate: lipschitz,
        samples,
        seed,
        certified: certified_constants(mapping),
    })
}
