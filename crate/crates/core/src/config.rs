//! Scenario configuration: parsing, defaults and validation.
//!
//! Laws and initial data may be given as a bare name (`"identity"`) or as
//! `{"kind": ..., "params": {...}}`. Domain keys may sit at the top level or
//! under `domain`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nonlinearities::{FeedbackLaw, ForcingLaw};
use crate::solver::{InitialKind, LeftBoundary, SolverConfig};
use crate::state_space::Grid;

/// Default number of stored states per run when no stride is given.
pub const DEFAULT_SNAPSHOTS_PER_RUN: usize = 50;

const DOMAIN_KEYS: [&str; 8] = [
    "L",
    "N",
    "cfl_lambda",
    "t_final",
    "sample_stride",
    "boundary_tol",
    "boundary_max_iter",
    "left_boundary",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n_cells: usize,
    #[serde(default = "default_lambda")]
    pub cfl_lambda: f64,
    pub t_final: f64,
    /// row decimation of energy.csv and traces.csv
    #[serde(default = "default_one")]
    pub sample_stride: usize,
    #[serde(default = "default_tol")]
    pub boundary_tol: f64,
    #[serde(default = "default_max_iter")]
    pub boundary_max_iter: usize,
    #[serde(default)]
    pub left_boundary: LeftBoundary,
}

fn default_lambda() -> f64 {
    0.9
}
fn default_one() -> usize {
    1
}
fn default_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    /// monotone when `F` is nonincreasing, anti-damping otherwise
    #[default]
    Auto,
    Monotone,
    #[serde(alias = "anti_damping")]
    Antidamping,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    #[serde(default)]
    pub mode: CertificateMode,
    #[serde(default = "default_rho0")]
    pub rho0: f64,
    #[serde(rename = "rhoL", default = "default_rho_l")]
    pub rho_l: f64,
    #[serde(default)]
    pub grid_search: bool,
}

fn default_rho0() -> f64 {
    1.0
}
fn default_rho_l() -> f64 {
    2.0
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self {
            mode: CertificateMode::Auto,
            rho0: default_rho0(),
            rho_l: default_rho_l(),
            grid_search: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub emit_snapshots: bool,
    /// steps between stored states; default gives about 50 per run
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// cell counts for the convergence table; empty skips it
    #[serde(default)]
    pub convergence_n: Vec<usize>,
    /// oracle comparison only up to this time
    #[serde(default)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub domain: DomainConfig,
    pub g: FeedbackLaw,
    #[serde(rename = "F")]
    pub forcing: ForcingLaw,
    pub init: InitialKind,
    #[serde(default)]
    pub certificate: CertificateConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

impl ScenarioConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.domain.length, self.domain.n_cells)
            .map_err(|e| Error::Config(format!("domain: {e}")))
    }

    /// Solver settings; `sample_stride` there is the snapshot stride.
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let grid = self.grid()?;
        let mut cfg = SolverConfig {
            cfl_lambda: self.domain.cfl_lambda,
            t_final: self.domain.t_final,
            boundary_tol: self.domain.boundary_tol,
            boundary_max_iter: self.domain.boundary_max_iter,
            sample_stride: 1,
            left_boundary: self.domain.left_boundary,
        };
        let (steps, _) = cfg.time_grid(&grid);
        cfg.sample_stride = self
            .output
            .snapshot_stride
            .unwrap_or_else(|| (steps / DEFAULT_SNAPSHOTS_PER_RUN).max(1));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        let bad = |key: &str, range: &str, value: String| {
            Err(Error::Config(format!("{key} must be {range}, got {value}")))
        };
        if !(d.length > 0.0 && d.length.is_finite()) {
            return bad("L", "a positive finite number", d.length.to_string());
        }
        if d.n_cells < 4 {
            return bad("N", ">= 4", d.n_cells.to_string());
        }
        if !(d.cfl_lambda > 0.0 && d.cfl_lambda <= 1.0) {
            return bad("cfl_lambda", "in (0, 1]", d.cfl_lambda.to_string());
        }
        if !(d.t_final > 0.0 && d.t_final.is_finite()) {
            return bad("t_final", "positive", d.t_final.to_string());
        }
        if d.sample_stride == 0 {
            return bad("sample_stride", ">= 1", "0".into());
        }
        if !(d.boundary_tol > 0.0) {
            return bad("boundary_tol", "positive", d.boundary_tol.to_string());
        }
        if d.boundary_max_iter == 0 {
            return bad("boundary_max_iter", ">= 1", "0".into());
        }
        if self.output.snapshot_stride == Some(0) {
            return bad("output.snapshot_stride", ">= 1", "0".into());
        }
        let c = &self.certificate;
        if !(c.rho0 > 0.0 && c.rho_l > c.rho0 && c.rho_l.is_finite()) {
            return Err(Error::Config(format!(
                "certificate.rho0/rhoL must satisfy 0 < rho0 < rhoL, got ({}, {})",
                c.rho0, c.rho_l
            )));
        }
        if self.oracle.convergence_n.iter().any(|&n| n < 4) {
            return bad("oracle.convergence_n", "entries >= 4", format!("{:?}", self.oracle.convergence_n));
        }
        self.g.validate().map_err(|e| Error::Config(format!("g: {e}")))?;
        self.forcing.validate().map_err(|e| Error::Config(format!("F: {e}")))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
    let Value::Object(mut top) = raw else {
        return Err(Error::Config("config must be a JSON object".into()));
    };

    let mut domain = match top.remove("domain") {
        Some(Value::Object(m)) => m,
        Some(_) => return Err(Error::Config("domain must be an object".into())),
        None => Map::new(),
    };
    for key in DOMAIN_KEYS {
        if let Some(v) = top.remove(key) {
            if domain.contains_key(key) {
                return Err(Error::Config(format!("{key} given both at top level and in domain")));
            }
            domain.insert(key.to_string(), v);
        }
    }
    let length = domain.get("L").and_then(Value::as_f64).unwrap_or(1.0);
    top.insert("domain".into(), Value::Object(domain));

    for (key, defaults) in [("g", law_defaults as fn(&str, f64) -> Map<String, Value>), ("F", law_defaults), ("init", init_defaults)] {
        if let Some(v) = top.remove(key) {
            top.insert(key.into(), normalize_kind(key, v, length, defaults)?);
        }
    }

    let config: ScenarioConfig = serde_json::from_value(Value::Object(top))
        .map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

fn law_defaults(_kind: &str, _length: f64) -> Map<String, Value> {
    Map::new()
}

fn init_defaults(kind: &str, length: f64) -> Map<String, Value> {
    let mut m = Map::new();
    match kind {
        "gaussian_bump" | "right_moving_pulse" => {
            m.insert("amplitude".into(), 1.0.into());
            m.insert("center".into(), (0.5 * length).into());
            m.insert("width".into(), 0.05.into());
        }
        "sine_mode" => {
            m.insert("amplitude".into(), 1.0.into());
            m.insert("mode".into(), 1.into());
        }
        "constant_offset" => {
            m.insert("value".into(), 0.0.into());
        }
        _ => {}
    }
    m
}

/// Turns `"name"` or `{"kind", "params"}` into the tagged form
/// `{"kind": name, ...params}` the law types deserialize from.
fn normalize_kind(
    key: &str,
    value: Value,
    length: f64,
    defaults: fn(&str, f64) -> Map<String, Value>,
) -> Result<Value> {
    let (kind, params) = match value {
        Value::String(s) => (s, Map::new()),
        Value::Object(mut m) => {
            let kind = match m.remove("kind") {
                Some(Value::String(s)) => s,
                _ => return Err(Error::Config(format!("{key}: missing string field \"kind\""))),
            };
            let params = match m.remove("params") {
                Some(Value::Object(p)) => p,
                Some(Value::Null) | None => Map::new(),
                Some(_) => return Err(Error::Config(format!("{key}.params must be an object"))),
            };
            // inline parameters next to "kind" are accepted as well
            let mut params = params;
            for (k, v) in m {
                if params.insert(k.clone(), v).is_some() {
                    return Err(Error::Config(format!("{key}: parameter {k} given twice")));
                }
            }
            (kind, params)
        }
        _ => return Err(Error::Config(format!("{key} must be a name or an object"))),
    };
    let (kind, mut out) = match kind.as_str() {
        "identity" => {
            if !params.is_empty() {
                return Err(Error::Config(format!("{key}: identity takes no parameters")));
            }
            let mut m = Map::new();
            m.insert("gain".into(), 1.0.into());
            ("linear_gain".to_string(), m)
        }
        _ => (kind.clone(), defaults(&kind, length)),
    };
    for (k, v) in params {
        out.insert(k, v);
    }
    out.insert("kind".into(), Value::String(kind));
    Ok(Value::Object(out))
}

/// Parameter grid for `sweep`: the Cartesian product of all lists, in key
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameters: BTreeMap<String, Vec<f64>>,
}

pub const SWEEP_PARAMETERS: [&str; 5] = ["q", "gain", "width", "k", "amplitude"];

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: SweepSpec =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("sweep: {e}")))?;
        if spec.parameters.is_empty() {
            return Err(Error::Config("sweep: no parameters".into()));
        }
        for (name, values) in &spec.parameters {
            if !SWEEP_PARAMETERS.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "sweep: unknown parameter {name}, expected one of {SWEEP_PARAMETERS:?}"
                )));
            }
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("sweep: {name} needs finite values")));
            }
        }
        Ok(spec)
    }

    pub fn names(&self) -> Vec<String> {
        self.parameters.keys().cloned().collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for values in self.parameters.values() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// Copy of `base` with one sweep parameter replaced.
pub fn apply_parameter(base: &ScenarioConfig, name: &str, value: f64) -> Result<ScenarioConfig> {
    let mut c = base.clone();
    let mismatch = |what: &str| Err(Error::Config(format!("sweep parameter {name} needs {what}")));
    match name {
        "q" => match &mut c.forcing {
            ForcingLaw::TanhAntidamping { q } => *q = value,
            ForcingLaw::Linear { slope } => *slope = value,
            ForcingLaw::PiecewiseLinear { inner, .. } => *inner = value,
            _ => return mismatch("F = tanh_antidamping, linear or piecewise_linear"),
        },
        "k" => match &mut c.forcing {
            ForcingLaw::MonotoneDamping { k } => *k = value,
            _ => return mismatch("F = monotone_damping"),
        },
        "gain" => match &mut c.g {
            FeedbackLaw::LinearGain { gain } | FeedbackLaw::Saturation { gain, .. } => *gain = value,
            _ => return mismatch("g = linear_gain or saturation"),
        },
        "width" => match &mut c.g {
            FeedbackLaw::Deadzone { width } => *width = value,
            _ => return mismatch("g = deadzone"),
        },
        "amplitude" => c.init = c.init.with_amplitude(value),
        _ => return Err(Error::Config(format!("unknown sweep parameter {name}"))),
    }
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_flat_config() {
        let c = parse_config(
            r#"{"L": 1, "N": 400, "t_final": 3, "g": "identity", "F": "zero", "init": "right_moving_pulse"}"#,
        )
        .unwrap();
        assert_eq!(c.domain.cfl_lambda, 0.9);
        assert_eq!(c.domain.boundary_tol, 1e-12);
        assert_eq!(c.domain.sample_stride, 1);
        assert_eq!(c.g, FeedbackLaw::identity());
        assert_eq!(c.forcing, ForcingLaw::Zero);
        assert_eq!(c.init.amplitude(), 1.0);
        assert_eq!(c.certificate.mode, CertificateMode::Auto);
    }

    #[test]
    fn nested_config_with_params() {
        let c = parse_config(
            r#"{
                "domain": {"L": 2, "N": 64, "t_final": 5, "cfl_lambda": 0.5},
                "g": {"kind": "deadzone", "params": {"width": 0.5}},
                "F": {"kind": "tanh_antidamping", "params": {"q": 0.4}},
                "init": {"kind": "sine_mode", "params": {"amplitude": 2, "mode": 3}},
                "certificate": {"mode": "antidamping"},
                "output": {"emit_snapshots": true, "snapshot_stride": 10}
            }"#,
        )
        .unwrap();
        assert_eq!(c.g, FeedbackLaw::Deadzone { width: 0.5 });
        assert_eq!(c.init, InitialKind::SineMode { amplitude: 2.0, mode: 3 });
        assert_eq!(c.solver_config().unwrap().sample_stride, 10);
    }

    #[test]
    fn rejects_small_grid_and_unknown_keys() {
        let e = parse_config(r#"{"L": 1, "N": 2, "t_final": 1, "g": "identity", "F": "zero", "init": "sine_mode"}"#)
            .unwrap_err();
        assert!(e.to_string().contains("N must be >= 4"), "{e}");
        let e = parse_config(
            r#"{"L": 1, "N": 40, "t_final": 1, "g": "identity", "F": "zero", "init": "sine_mode", "dampener": 3}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("dampener"), "{e}");
        let e = parse_config(r#"{"L": 1, "N": 40, "t_final": 1, "g": "bogus", "F": "zero", "init": "sine_mode"}"#)
            .unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        assert!(matches!(e, Error::Config(_)));
        let e = parse_config(
            r#"{"L": 1, "N": 40, "t_final": 1, "g": "identity", "F": "zero", "init": {"kind": "sine_mode", "params": {"phase": 1}}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("phase"), "{e}");
        let e = parse_config(
            r#"{"L": 1, "N": 40, "t_final": 1, "g": "identity", "F": "zero", "init": {"kind": "gaussian_bump", "params": {"sigma": 1}}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("sigma"), "{e}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let text = r#"{"L": 1, "N": 40, "t_final": 1, "g": "identity", "F": "zero", "init": "sine_mode"}"#;
        let a = parse_config(text).unwrap();
        assert_eq!(a.hash(), parse_config(text).unwrap().hash());
        assert_eq!(a.hash().len(), 64);
        let b = apply_parameter(&a, "amplitude", 2.0).unwrap();
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn sweep_grid_order() {
        let s = SweepSpec::parse(r#"{"parameters": {"q": [0.1, 0.2], "amplitude": [1, 2, 3]}}"#).unwrap();
        assert_eq!(s.names(), vec!["amplitude", "q"]);
        let p = s.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![1.0, 0.1]);
        assert_eq!(p[1], vec![1.0, 0.2]);
        assert!(SweepSpec::parse(r#"{"parameters": {"speed": [1]}}"#).is_err());
    }
}
