#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cvi(args: &[&str]) -> Run {
    cvi_env(args, &[])
}

pub fn cvi_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cvi"));
    cmd.args(args).env_remove("CVI_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// One of the spec files shipped with the crate.
pub fn shipped(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("specs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Writes `text` to a fresh file in `dir`.
pub fn spec_file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

pub fn json(run: &Run) -> serde_json::Value {
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    serde_json::from_str(&run.stdout).expect("stdout is one JSON document")
}

pub fn floats(v: &serde_json::Value) -> Vec<f64> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|x| x.as_f64().expect("number"))
        .collect()
}

pub fn assert_close(actual: &[f64], expected: &[f64], tol: f64) {
    assert_eq!(actual.len(), expected.len());
    let gap = actual
        .iter()
        .zip(expected)
        .map(|(a, e)| (a - e).abs())
        .fold(0.0, f64::max);
    assert!(gap <= tol, "got {actual:?}, expected {expected:?} (gap {gap:e})");
}

/// Values in the table rows `label value...` of human output.
pub fn table_row(stdout: &str, label: &str) -> Vec<f64> {
    let line = stdout
        .lines()
        .find(|l| l.split_whitespace().next() == Some(label))
        .unwrap_or_else(|| panic!("no row {label} in\n{stdout}"));
    line.split_whitespace().skip(1).filter_map(|t| t.parse().ok()).collect()
}

/// Wardrop equilibria of the default Braess network (demand 6), with the
/// middle edge open and closed.
pub const BRAESS_OPEN: [f64; 5] = [4.0, 2.0, 2.0, 2.0, 4.0];
pub const BRAESS_CLOSED: [f64; 5] = [3.0, 3.0, 0.0, 3.0, 3.0];

/// Interior root of the two-provider economy, solved by hand:
/// Q = (1213/58, 1727/58), q = (20, 10), pi = Q / 2.
pub const ECONOMY_ROOT: [f64; 6] = [
    1213.0 / 58.0,
    1727.0 / 58.0,
    20.0,
    10.0,
    1213.0 / 116.0,
    1727.0 / 116.0,
];

/// Root of the economy's linear field `Mx + c` after adding `delta` to
/// `c[index]`, by LU on the model's matrix.
pub fn economy_shift_oracle(index: usize, delta: f64) -> Vec<f64> {
    let p = cvi::models::build_economy(&cvi::models::EconomySpec::two_provider_instance()).unwrap();
    let (m, mut c) = p.mapping().as_affine().unwrap();
    c[index] += delta;
    m.lu().solve(&(-c)).unwrap().as_slice().to_vec()
}
