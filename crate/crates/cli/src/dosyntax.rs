//! `--do` arguments: `kind:key=value,key=value`.

use std::collections::BTreeMap;

use crate::error::{CliError, CliResult};
use crate::spec::{InterventionSpec, Stddev};

pub fn parse_do(text: &str) -> CliResult<InterventionSpec> {
    let bad = |msg: String| CliError::Input(format!("--do {text:?}: {msg}"));
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| bad("expected kind:key=value,...".into()))?;
    let mut fields = BTreeMap::new();
    for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, found {pair:?}")))?;
        if fields.insert(k.trim(), v.trim()).is_some() {
            return Err(bad(format!("key {:?} given twice", k.trim())));
        }
    }
    let mut take = |key: &str| fields.remove(key).ok_or_else(|| bad(format!("missing {key}")));
    let spec = match kind.trim() {
        "clamp" => InterventionSpec::Clamp {
            index: int(take("index")?).map_err(&bad)?,
            value: float(take("value")?).map_err(&bad)?,
        },
        "shift" => InterventionSpec::Shift {
            index: int(take("index")?).map_err(&bad)?,
            delta: float(take("delta")?).map_err(&bad)?,
        },
        "noise" => InterventionSpec::Noise {
            component: int(take("component")?).map_err(&bad)?,
            stddev: Stddev::Scalar(float(take("stddev")?).map_err(&bad)?),
            seed: match take("seed") {
                Ok(s) => s.parse().map_err(|_| bad(format!("seed {s:?} is not an unsigned integer")))?,
                Err(_) => 0,
            },
        },
        other => {
            return Err(bad(format!(
                "unknown intervention {other:?} (expected clamp, shift or noise)"
            )))
        }
    };
    if let Some(key) = fields.keys().next() {
        return Err(bad(format!("unexpected key {key:?}")));
    }
    Ok(spec)
}

fn int(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("{s:?} is not a nonnegative integer"))
}

fn float(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("{s:?} is not a finite number")),
    }
}
