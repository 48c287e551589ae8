//! JSON documents and their human-readable renderings. Human output uses 6
//! decimals; JSON keeps full precision.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathDelay {
    pub path: String,
    pub delay: f64,
}

/// Output of `solve` and `intervene`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveDocument {
    pub command: String,
    pub model: String,
    pub interventions: Vec<String>,
    pub algorithm: String,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub labels: Vec<String>,
    pub point: Vec<f64>,
    /// Braess models only.
    pub path_delays: Option<Vec<PathDelay>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionalDocument {
    pub first: f64,
    pub second: f64,
    pub first_negative: bool,
    pub second_nonpositive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDocument {
    pub component: usize,
    pub contribution: f64,
    pub treated: bool,
}

/// Output of `compare`. In `solution_diff` mode the analysis fields are null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareDocument {
    pub command: String,
    pub model: String,
    pub interventions: Vec<String>,
    pub algorithm: String,
    pub seed: u64,
    /// `treatment_effect` or `solution_diff`.
    pub mode: String,
    pub labels: Vec<String>,
    pub untreated: Vec<f64>,
    pub treated: Vec<f64>,
    pub difference: Vec<f64>,
    pub effect_norm: f64,
    pub bound: Option<f64>,
    pub mu: Option<f64>,
    pub mu_certified: Option<bool>,
    pub bound_satisfied: Option<bool>,
    pub directional: Option<DirectionalDocument>,
    /// Ranked by decreasing magnitude.
    pub components: Option<Vec<ComponentDocument>>,
    pub note: Option<String>,
    pub warnings: Vec<String>,
}

/// Output of `check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDocument {
    pub command: String,
    pub model: String,
    pub dim: usize,
    pub symmetric: bool,
    pub positive_definite: bool,
    pub monotone: bool,
    pub mu_hat: f64,
    pub lipschitz_hat: f64,
    pub mu_certified: Option<f64>,
    pub lipschitz_certified: Option<f64>,
    pub strongly_monotone: bool,
    pub optimization_equivalent: bool,
    pub samples: usize,
    pub seed: u64,
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents hold only plain data")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn header(out: &mut String, model: &str, dim: usize, interventions: &[String]) {
    writeln!(out, "model: {model} ({dim} variables)").unwrap();
    for i in interventions {
        writeln!(out, "intervention: {i}").unwrap();
    }
}

fn width(labels: &[String]) -> usize {
    labels.iter().map(String::len).max().unwrap_or(0).max(8)
}

pub fn render_solve(doc: &SolveDocument) -> String {
    let mut out = String::new();
    header(&mut out, &doc.model, doc.point.len(), &doc.interventions);
    writeln!(out, "algorithm: {}  seed: {}", doc.algorithm, doc.seed).unwrap();
    writeln!(
        out,
        "converged: {}  iterations: {}  residual: {:.6e}",
        yes_no(doc.converged),
        doc.iterations,
        doc.residual
    )
    .unwrap();
    let w = width(&doc.labels);
    writeln!(out, "{:<w$}  {:>14}", "variable", "value").unwrap();
    for (label, v) in doc.labels.iter().zip(&doc.point) {
        writeln!(out, "{label:<w$}  {v:>14.6}").unwrap();
    }
    if let Some(delays) = &doc.path_delays {
        writeln!(out, "{:<w$}  {:>14}", "path", "delay").unwrap();
        for d in delays {
            writeln!(out, "{:<w$}  {:>14.6}", d.path, d.delay).unwrap();
        }
    }
    out
}

pub fn render_compare(doc: &CompareDocument) -> String {
    let mut out = String::new();
    header(&mut out, &doc.model, doc.untreated.len(), &doc.interventions);
    writeln!(out, "algorithm: {}  seed: {}", doc.algorithm, doc.seed).unwrap();
    let w = width(&doc.labels);
    writeln!(out, "{:<w$}  {:>14}  {:>14}  {:>14}", "variable", "untreated", "treated", "difference").unwrap();
    for i in 0..doc.labels.len() {
        writeln!(
            out,
            "{:<w$}  {:>14.6}  {:>14.6}  {:>14.6}",
            doc.labels[i], doc.untreated[i], doc.treated[i], doc.difference[i]
        )
        .unwrap();
    }
    writeln!(out, "effect norm: {:.6}", doc.effect_norm).unwrap();
    if let (Some(bound), Some(mu), Some(certified), Some(ok)) = (doc.bound, doc.mu, doc.mu_certified, doc.bound_satisfied) {
        writeln!(
            out,
            "bound: {bound:.6}  (mu = {mu:.6}, {})",
            if certified { "exact" } else { "sampled" }
        )
        .unwrap();
        writeln!(out, "bound satisfied: {}", yes_no(ok)).unwrap();
    }
    if let Some(d) = &doc.directional {
        writeln!(
            out,
            "<F1(x1) - F0(x1), x1 - x0>: {:.6}  negative: {}",
            d.first,
            yes_no(d.first_negative)
        )
        .unwrap();
        writeln!(
            out,
            "<F1(x1) - F0(x0), x1 - x0>: {:.6}  nonpositive: {}",
            d.second,
            yes_no(d.second_nonpositive)
        )
        .unwrap();
    }
    if let Some(components) = &doc.components {
        writeln!(out, "{:>9}  {:>14}  {:>7}", "component", "contribution", "treated").unwrap();
        for c in components {
            writeln!(out, "{:>9}  {:>14.6}  {:>7}", c.component, c.contribution, yes_no(c.treated)).unwrap();
        }
    }
    if let Some(note) = &doc.note {
        writeln!(out, "note: {note}").unwrap();
    }
    for warning in &doc.warnings {
        writeln!(out, "warning: {warning}").unwrap();
    }
    out
}

pub fn render_check(doc: &CheckDocument) -> String {
    let mut out = String::new();
    header(&mut out, &doc.model, doc.dim, &[]);
    writeln!(out, "symmetric: {}", yes_no(doc.symmetric)).unwrap();
    writeln!(out, "positive definite: {}", yes_no(doc.positive_definite)).unwrap();
    writeln!(out, "monotone: {}", yes_no(doc.monotone)).unwrap();
    writeln!(out, "mu_hat: {:.6}", doc.mu_hat).unwrap();
    writeln!(out, "L_hat: {:.6}", doc.lipschitz_hat).unwrap();
    if let (Some(mu), Some(l)) = (doc.mu_certified, doc.lipschitz_certified) {
        writeln!(out, "exact mu: {mu:.6}").unwrap();
        writeln!(out, "exact L: {l:.6}").unwrap();
    }
    writeln!(out, "samples: {}  seed: {}", doc.samples, doc.seed).unwrap();
    let shape = if doc.positive_definite {
        "positive definite"
    } else if doc.monotone {
        "monotone"
    } else {
        "not monotone"
    };
    let upper = |b: bool| if b { "YES" } else { "NO" };
    writeln!(
        out,
        "summary: {}, {shape}; strong monotonicity: {}; equivalent to convex optimization: {}",
        if doc.symmetric { "symmetric" } else { "non-symmetric" },
        upper(doc.strongly_monotone),
        upper(doc.optimization_equivalent)
    )
    .unwrap();
    out
}
