//! Three-tier network economy: service providers choose quantities `Q`,
//! network providers choose qualities `q` and prices `pi`, for every
//! (provider i, network j, market k) triple.
//!
//! The cost families are quadratic, so every block of the mapping is affine:
//!
//! ```text
//! f_i(Q)      = sum_jk a_ijk Q_ijk^2 + b_ijk Q_ijk          production
//! rho_v(Q, q) = rho0_v - sum_w P[v][w] Q_w + s_v q_v        demand price
//! c_v(q)      = w_v / 2 (q_v - t_v)^2                       transport
//! oc_v(pi)    = g_v pi_v^2                                  opportunity
//! ```
//!
//! and the blocks are the negative utility gradients
//!
//! ```text
//! F1_v = df_i/dQ_v + pi_v - rho_v - sum_{w of provider i} (d rho_w / d Q_v) Q_w
//! F2_v = dc_v/dq_v
//! F3_v = -Q_v + d oc_v / d pi_v
//! ```

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CviError, Result};
use crate::intervention::Intervention;
use crate::mapping::{Component, Mapping, NoiseModel};
use crate::problem::Problem;
use crate::sets::FeasibleSet;

pub const QUANTITY_BLOCK: usize = 0;
pub const QUALITY_BLOCK: usize = 1;
pub const PRICE_BLOCK: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomySpec {
    pub m: usize,
    pub n: usize,
    pub o: usize,
    pub production_quadratic: Vec<f64>,
    pub production_linear: Vec<f64>,
    pub demand_intercept: Vec<f64>,
    /// Row-major `N x N` price sensitivities `P[v][w]`, `N = m n o`.
    pub demand_slopes: Vec<f64>,
    pub quality_premium: Vec<f64>,
    pub transport_weight: Vec<f64>,
    pub transport_target: Vec<f64>,
    pub opportunity_quadratic: Vec<f64>,
    /// Standard deviation of the additive noise on each of the `3N` outputs.
    pub noise_stddev: Vec<f64>,
    pub noise_seed: u64,
}

impl EconomySpec {
    /// Two service providers, one network provider, one market index per
    /// provider (the triples 111 and 211).
    pub fn two_provider_instance() -> Self {
        EconomySpec {
            m: 2,
            n: 1,
            o: 1,
            production_quadratic: vec![1.0, 2.0],
            production_linear: vec![1.0, 1.0],
            demand_intercept: vec![100.0, 200.0],
            demand_slopes: vec![1.0, 0.5, 0.5, 1.0],
            quality_premium: vec![0.5, 0.5],
            transport_weight: vec![1.0, 1.0],
            transport_target: vec![20.0, 10.0],
            opportunity_quadratic: vec![1.0, 1.0],
            noise_stddev: vec![0.0; 6],
            noise_seed: 0,
        }
    }

    pub fn with_noise(mut self, stddev: f64, seed: u64) -> Self {
        self.noise_stddev = vec![stddev; 3 * self.triples()];
        self.noise_seed = seed;
        self
    }

    /// Number of (i, j, k) triples.
    pub fn triples(&self) -> usize {
        self.m * self.n * self.o
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.o + k
    }

    fn provider(&self, v: usize) -> usize {
        v / (self.n * self.o)
    }

    fn validate(&self) -> Result<()> {
        let n = self.triples();
        if n == 0 {
            return Err(CviError::InvalidModel("economy needs m, n, o >= 1".into()));
        }
        let tables: [(&str, &Vec<f64>, usize); 10] = [
            ("production_quadratic", &self.production_quadratic, n),
            ("production_linear", &self.production_linear, n),
            ("demand_intercept", &self.demand_intercept, n),
            ("demand_slopes", &self.demand_slopes, n * n),
            ("quality_premium", &self.quality_premium, n),
            ("transport_weight", &self.transport_weight, n),
            ("transport_target", &self.transport_target, n),
            ("opportunity_quadratic", &self.opportunity_quadratic, n),
            ("noise_stddev", &self.noise_stddev, 3 * n),
            ("noise_stddev", &self.noise_stddev, 3 * n),
        ];
        for (name, table, len) in tables {
            if table.len() != len {
                return Err(CviError::InvalidModel(format!(
                    "{name} has {} entries, expected {len}",
                    table.len()
                )));
            }
            if table.iter().any(|v| !v.is_finite()) {
                return Err(CviError::InvalidModel(format!("{name} has non-finite entries")));
            }
        }
        if self.noise_stddev.iter().any(|s| *s < 0.0) {
            return Err(CviError::InvalidModel("noise standard deviations must be nonnegative".into()));
        }
        Ok(())
    }

    /// Rows of `F1` as an `N x 3N` affine block.
    fn quantity_block(&self) -> (DMatrix<f64>, Vec<f64>) {
        let n = self.triples();
        let slope = |v: usize, w: usize| self.demand_slopes[v * n + w];
        let mut matrix = DMatrix::zeros(n, 3 * n);
        let mut constant = vec![0.0; n];
        for v in 0..n {
            for w in 0..n {
                let mut coef = slope(v, w);
                if self.provider(w) == self.provider(v) {
                    coef += slope(w, v);
                }
                if v == w {
                    coef += 2.0 * self.production_quadratic[v];
                }
                matrix[(v, w)] = coef;
            }
            matrix[(v, n + v)] = -self.quality_premium[v];
            matrix[(v, 2 * n + v)] = 1.0;
            constant[v] = self.production_linear[v] - self.demand_intercept[v];
        }
        (matrix, constant)
    }

    fn quality_block(&self) -> (DMatrix<f64>, Vec<f64>) {
        let n = self.triples();
        let mut matrix = DMatrix::zeros(n, 3 * n);
        let mut constant = vec![0.0; n];
        for v in 0..n {
            matrix[(v, n + v)] = self.transport_weight[v];
            constant[v] = -self.transport_weight[v] * self.transport_target[v];
        }
        (matrix, constant)
    }

    fn price_block(&self) -> (DMatrix<f64>, Vec<f64>) {
        let n = self.triples();
        let mut matrix = DMatrix::zeros(n, 3 * n);
        for v in 0..n {
            matrix[(v, v)] = -1.0;
            matrix[(v, 2 * n + v)] = 2.0 * self.opportunity_quadratic[v];
        }
        (matrix, vec![0.0; n])
    }

    pub fn labels(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(3 * self.triples());
        for prefix in ["Q", "q", "pi"] {
            for i in 0..self.m {
                for j in 0..self.n {
                    for k in 0..self.o {
                        names.push(format!("{prefix}_{}{}{}", i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        names
    }
}

fn block(spec: &EconomySpec, index: usize, (matrix, constant): (DMatrix<f64>, Vec<f64>)) -> Result<Component> {
    let n = spec.triples();
    let range = index * n..(index + 1) * n;
    let noise = NoiseModel::gaussian(
        spec.noise_stddev[range.clone()].to_vec(),
        spec.noise_seed.wrapping_add(index as u64),
    )?;
    Ok(Component {
        range,
        mapping: Mapping::stochastic(Mapping::affine(matrix, constant)?, noise)?,
    })
}

/// Partitioned, stochastic VI over `R^{3N}_+` with blocks `(F1, F2, F3)`.
/// The feasible set is the product of one orthant per block.
pub fn build_economy(spec: &EconomySpec) -> Result<Problem> {
    spec.validate()?;
    let n = spec.triples();
    let mapping = Mapping::partitioned(vec![
        block(spec, QUANTITY_BLOCK, spec.quantity_block())?,
        block(spec, QUALITY_BLOCK, spec.quality_block())?,
        block(spec, PRICE_BLOCK, spec.price_block())?,
    ])?;
    let set = FeasibleSet::product(vec![
        FeasibleSet::orthant(n),
        FeasibleSet::orthant(n),
        FeasibleSet::orthant(n),
    ])?;
    Problem::new(mapping, set)?.with_labels(spec.labels())
}

/// `do(q_v = 0)` on the quantity block: the demand price no longer sees the
/// network quality `q_v`, so `F1` is rebuilt with that quality premium removed.
/// The quality coordinate itself is still chosen by its network provider.
pub fn exogenize_quality(spec: &EconomySpec, triple: usize) -> Result<Intervention> {
    spec.validate()?;
    if triple >= spec.triples() {
        return Err(CviError::ComponentOutOfRange {
            index: triple,
            count: spec.triples(),
        });
    }
    let mut treated = spec.clone();
    treated.quality_premium[triple] = 0.0;
    let component = block(&treated, QUANTITY_BLOCK, treated.quantity_block())?;
    Ok(Intervention::ReplaceComponent {
        component_index: QUANTITY_BLOCK,
        new_mapping: component.mapping,
    })
}
