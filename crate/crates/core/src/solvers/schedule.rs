use serde::{Deserialize, Serialize};

use crate::error::{CviError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StepRule {
    Constant { alpha: f64 },
    /// `alpha_k = a / (k + b)`
    Polynomial { a: f64, b: f64 },
}

/// Step sizes `alpha_k` plus the relaxation `beta` of the two-step method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSchedule {
    pub rule: StepRule,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    1.0
}

impl StepSchedule {
    pub fn constant(alpha: f64) -> Self {
        StepSchedule {
            rule: StepRule::Constant { alpha },
            beta: 1.0,
        }
    }

    pub fn polynomial(a: f64, b: f64, beta: f64) -> Self {
        StepSchedule {
            rule: StepRule::Polynomial { a, b },
            beta,
        }
    }

    pub fn alpha(&self, k: usize) -> f64 {
        match self.rule {
            StepRule::Constant { alpha } => alpha,
            StepRule::Polynomial { a, b } => a / (k as f64 + b),
        }
    }

    /// `gamma = beta (2 - beta)`, positive iff `beta` is in `(0, 2)`.
    pub fn gamma(&self) -> f64 {
        self.beta * (2.0 - self.beta)
    }

    pub fn validate_deterministic(&self) -> Result<()> {
        match self.rule {
            StepRule::Constant { alpha } if alpha.is_finite() && alpha > 0.0 => Ok(()),
            StepRule::Constant { alpha } => Err(CviError::InvalidSchedule(format!(
                "constant step must be positive, got {alpha}"
            ))),
            StepRule::Polynomial { .. } => self.validate_polynomial(),
        }
    }

    /// Diminishing steps with `sum alpha_k = inf`, `sum alpha_k^2 < inf` and
    /// `sum alpha_k^2 / gamma < inf`: polynomial `a / (k + b)` with `a > 0`,
    /// `b >= 1` and `beta in (0, 2)`.
    pub fn validate_incremental(&self) -> Result<()> {
        match self.rule {
            StepRule::Constant { .. } => Err(CviError::InvalidSchedule(
                "constant steps are not square-summable; the incremental method needs a polynomial schedule"
                    .into(),
            )),
            StepRule::Polynomial { .. } => self.validate_polynomial(),
        }
    }

    fn validate_polynomial(&self) -> Result<()> {
        let StepRule::Polynomial { a, b } = self.rule else {
            unreachable!()
        };
        if !(a.is_finite() && a > 0.0) {
            return Err(CviError::InvalidSchedule(format!("polynomial numerator must be positive, got {a}")));
        }
        if !(b.is_finite() && b >= 1.0) {
            return Err(CviError::InvalidSchedule(format!("polynomial offset must be >= 1, got {b}")));
        }
        if !(self.beta > 0.0 && self.beta < 2.0) {
            return Err(CviError::InvalidSchedule(format!(
                "beta must lie in (0, 2), got {}",
                self.beta
            )));
        }
        Ok(())
    }
}
