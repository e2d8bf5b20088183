//! Run configuration: JSON document, strict schema, validated into core types.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qtran_core::ground_state::DEFAULT_EPS_MIN;
use qtran_core::model::{build_chain, build_single_site, BiasKind, BiasProfile, DeviceModel, InducedFockRule};
use qtran_core::oracle::{Init, DEFAULT_LEVELS, DEFAULT_ORACLE_DT};
use qtran_core::propagator::DissipatorKind;
use qtran_core::scalar::C;
use qtran_core::ComplexMatrix;

use crate::error::CliError;

/// Keys every document must carry.
pub const REQUIRED_KEYS: [&str; 6] = ["model", "bias", "rule", "dissipator", "dt", "t_end"];

/// Environment variable that overrides `eps_min`.
pub const EPS_MIN_ENV: &str = "QTRAN_EPS_MIN";

/// Row-major matrix of [re, im] pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    SingleSite { eps_d: f64, lambda_l: f64, lambda_r: f64, mu0: f64 },
    Chain { n: usize, eps: f64, hop: f64, lambda_l: f64, lambda_r: f64, mu0: f64 },
    Matrices { h0: MatrixSpec, lambda_l: MatrixSpec, lambda_r: MatrixSpec, mu0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LeadBiasSpec {
    Zero,
    SmoothStep { amplitude: f64, rise_time: f64 },
    Step { amplitude: f64 },
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSpec {
    pub left: LeadBiasSpec,
    pub right: LeadBiasSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    HalfSum,
    None,
    Tabulated { times: Vec<f64>, shifts: Vec<MatrixSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipatorSpec {
    WblAdiabatic,
    WblExact,
    Cso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitSpec {
    Partitioned,
    PartitionFree,
}

fn default_levels() -> usize {
    DEFAULT_LEVELS
}

fn default_oracle_dt() -> f64 {
    DEFAULT_ORACLE_DT
}

fn default_init() -> InitSpec {
    InitSpec::PartitionFree
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    /// Lead band width W in eV, shared by both leads.
    pub bandwidth: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_oracle_dt")]
    pub dt: f64,
    #[serde(default = "default_init")]
    pub init: InitSpec,
    /// Comparison window in fs; t_end when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionSpec {
    pub e_min: f64,
    pub e_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySpec {
    /// Total bias V per row, applied as ΔV_L = V/2, ΔV_R = −V/2.
    pub voltages: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub label: String,
    /// Partial document merged over the base configuration.
    pub set: Value,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub bias: BiasSpec,
    pub rule: RuleSpec,
    pub dissipator: DissipatorSpec,
    /// fs
    pub dt: f64,
    /// fs
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub gnuplot: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmission: Option<TransmissionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady: Option<SteadySpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepEntry>,
}

/// Parse and fully validate a document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::parse(&e))?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::validation("document must be an object"))?;
    let missing: Vec<&str> = REQUIRED_KEYS.iter().copied().filter(|k| !obj.contains_key(*k)).collect();
    if !missing.is_empty() {
        return Err(CliError::validation(format!("missing required keys: {}", missing.join(", "))));
    }
    // Typed pass over the text itself so schema errors keep their line and column.
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::parse(&e))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Check every invariant by building the core objects once.
    pub fn validate(&self) -> Result<(), CliError> {
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        if let Some(e) = self.eps_min {
            if !(e.is_finite() && e < 0.0) {
                return Err(CliError::validation("eps_min must be a finite negative energy"));
            }
        }
        let model = self.device_model()?;
        self.bias_profile()?;
        self.rule(model.n_orb())?;
        if let Some(o) = &self.oracle {
            positive("oracle.bandwidth", o.bandwidth)?;
            positive("oracle.dt", o.dt)?;
            if o.levels < 10 {
                return Err(CliError::validation("oracle.levels must be at least 10"));
            }
            if let Some(w) = o.window {
                positive("oracle.window", w)?;
            }
            self.oracle_decimation(o)?;
        }
        if let Some(t) = &self.transmission {
            if !(t.e_max > t.e_min) || t.points < 2 {
                return Err(CliError::validation("transmission needs e_max > e_min and at least 2 points"));
            }
        }
        if let Some(s) = &self.steady {
            if s.voltages.iter().any(|v| !v.is_finite()) {
                return Err(CliError::validation("steady.voltages must be finite"));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.sweep {
            let ok = !e.label.is_empty()
                && e.label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
            if !ok {
                return Err(CliError::validation(format!(
                    "sweep label {:?} must be non-empty and use only letters, digits, - and _",
                    e.label
                )));
            }
            if !seen.insert(e.label.as_str()) {
                return Err(CliError::validation(format!("duplicate sweep label {:?}", e.label)));
            }
            if !e.set.is_object() {
                return Err(CliError::validation(format!("sweep {:?}: set must be an object", e.label)));
            }
            if e.set.get("sweep").is_some() {
                return Err(CliError::validation(format!("sweep {:?}: nested sweeps are not allowed", e.label)));
            }
        }
        Ok(())
    }

    /// Cutoff from QTRAN_EPS_MIN, else the document, else the default.
    pub fn effective_eps_min(&self) -> Result<f64, CliError> {
        match std::env::var(EPS_MIN_ENV) {
            Ok(s) => {
                let v: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| CliError::validation(format!("{EPS_MIN_ENV}={s:?} is not a number")))?;
                if !(v.is_finite() && v < 0.0) {
                    return Err(CliError::validation(format!("{EPS_MIN_ENV} must be a finite negative energy")));
                }
                Ok(v)
            }
            Err(_) => Ok(self.eps_min.unwrap_or(DEFAULT_EPS_MIN)),
        }
    }

    pub fn device_model(&self) -> Result<DeviceModel<f64>, CliError> {
        let m = match &self.model {
            ModelSpec::SingleSite { eps_d, lambda_l, lambda_r, mu0 } => {
                build_single_site(*eps_d, *lambda_l, *lambda_r, *mu0)
            }
            ModelSpec::Chain { n, eps, hop, lambda_l, lambda_r, mu0 } => {
                build_chain(*n, *eps, *hop, *lambda_l, *lambda_r, *mu0)
            }
            ModelSpec::Matrices { h0, lambda_l, lambda_r, mu0 } => DeviceModel::new(
                matrix("model.h0", h0)?,
                matrix("model.lambda_l", lambda_l)?,
                matrix("model.lambda_r", lambda_r)?,
                *mu0,
            ),
        };
        m.map_err(|e| CliError::validation(format!("model: {e}")))
    }

    pub fn bias_profile(&self) -> Result<BiasProfile<f64>, CliError> {
        let (left, right) = (lead_bias(&self.bias.left), lead_bias(&self.bias.right));
        for (name, b) in [("bias.left", &left), ("bias.right", &right)] {
            b.validate().map_err(|e| CliError::validation(format!("{name}: {e}")))?;
        }
        BiasProfile::new(left, right).map_err(|e| CliError::validation(format!("bias: {e}")))
    }

    pub fn rule(&self, n_orb: usize) -> Result<InducedFockRule<f64>, CliError> {
        let r = match &self.rule {
            RuleSpec::HalfSum => InducedFockRule::HalfSum,
            RuleSpec::None => InducedFockRule::None,
            RuleSpec::Tabulated { times, shifts } => {
                let shifts = shifts
                    .iter()
                    .enumerate()
                    .map(|(k, s)| matrix(&format!("rule.tabulated.shifts[{k}]"), s))
                    .collect::<Result<Vec<_>, _>>()?;
                InducedFockRule::Tabulated { times: times.clone(), shifts }
            }
        };
        r.validate(n_orb).map_err(|e| CliError::validation(format!("rule: {e}")))?;
        Ok(r)
    }

    pub fn dissipator_kind(&self) -> DissipatorKind {
        match self.dissipator {
            DissipatorSpec::WblAdiabatic => DissipatorKind::WblAdiabatic,
            DissipatorSpec::WblExact => DissipatorKind::WblExact,
            DissipatorSpec::Cso => DissipatorKind::Cso,
        }
    }

    /// Oracle steps per WBL step; the two grids must nest.
    pub fn oracle_decimation(&self, o: &OracleSpec) -> Result<usize, CliError> {
        let ratio = self.dt / o.dt;
        let d = ratio.round();
        if d < 1.0 || (ratio - d).abs() > 1e-9 * ratio {
            return Err(CliError::validation("oracle.dt must divide dt exactly"));
        }
        Ok(d as usize)
    }

    /// One resolved configuration per sweep entry, or just this one.
    pub fn expand_sweep(&self) -> Result<Vec<(Option<String>, RunConfig)>, CliError> {
        if self.sweep.is_empty() {
            return Ok(vec![(None, self.clone())]);
        }
        let mut base = self.clone();
        base.sweep.clear();
        let base = serde_json::to_value(&base).expect("config serializes");
        let mut out = Vec::with_capacity(self.sweep.len());
        for e in &self.sweep {
            let mut v = base.clone();
            merge(&mut v, &e.set);
            let cfg: RunConfig = serde_json::from_value(v)
                .map_err(|err| CliError::validation(format!("sweep {:?}: {err}", e.label)))?;
            cfg.validate().map_err(|err| err.context(format!("sweep {:?}", e.label)))?;
            out.push((Some(e.label.clone()), cfg));
        }
        Ok(out)
    }
}

impl From<InitSpec> for Init {
    fn from(s: InitSpec) -> Self {
        match s {
            InitSpec::Partitioned => Init::Partitioned,
            InitSpec::PartitionFree => Init::PartitionFree,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("{name} must be positive and finite")))
    }
}

fn lead_bias(s: &LeadBiasSpec) -> BiasKind<f64> {
    match s {
        LeadBiasSpec::Zero => BiasKind::Zero,
        LeadBiasSpec::SmoothStep { amplitude, rise_time } => BiasKind::smooth_step(*amplitude, *rise_time),
        LeadBiasSpec::Step { amplitude } => BiasKind::Step { amplitude: *amplitude },
        LeadBiasSpec::Tabulated { times, values } => BiasKind::Tabulated { times: times.clone(), values: values.clone() },
    }
}

fn matrix(name: &str, rows: &MatrixSpec) -> Result<ComplexMatrix, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::validation(format!("{name} is empty")));
    }
    let m = rows[0].len();
    if let Some(k) = rows.iter().position(|r| r.len() != m) {
        return Err(CliError::validation(format!("{name}: row {k} has {} entries, expected {m}", rows[k].len())));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| C::new(rows[i][j][0], rows[i][j][1])))
}

/// Recursive object merge; non-object values in `patch` replace.
fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const BENCHMARK: &str = r#"{
        "model": {"kind": "single_site", "eps_d": 0.0, "lambda_l": 0.1, "lambda_r": 0.1, "mu0": 0.0},
        "bias": {"left": {"kind": "zero"}, "right": {"kind": "smooth_step", "amplitude": -2.0, "rise_time": 0.1}},
        "rule": "half_sum",
        "dissipator": "wbl_adiabatic",
        "dt": 0.02,
        "t_end": 60.0
    }"#;

    #[test]
    fn benchmark_document() {
        let cfg = parse_config(BENCHMARK).unwrap();
        assert_eq!(cfg.model, ModelSpec::SingleSite { eps_d: 0.0, lambda_l: 0.1, lambda_r: 0.1, mu0: 0.0 });
        let b = cfg.bias_profile().unwrap();
        assert_eq!(b.right, BiasKind::SmoothStep { amplitude: -2.0, rise_time: 0.1 });
        let m = cfg.device_model().unwrap();
        assert_eq!(m.lambda_l[(0, 0)].re, 0.1);
    }

    #[test]
    fn empty_document_lists_required_keys() {
        let err = parse_config("{}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("CONFIG"), "{msg}");
        for k in REQUIRED_KEYS {
            assert!(msg.contains(k), "{msg}");
        }
    }

    #[test]
    fn non_hermitian_h0_is_rejected() {
        let text = r#"{
            "model": {"kind": "matrices", "h0": [[[0,0],[1,0]],[[0.5,0],[0,0]]],
                      "lambda_l": [[[0.1,0],[0,0]],[[0,0],[0,0]]],
                      "lambda_r": [[[0,0],[0,0]],[[0,0],[0.1,0]]], "mu0": 0},
            "bias": {"left": {"kind": "zero"}, "right": {"kind": "zero"}},
            "rule": "none", "dissipator": "wbl_adiabatic", "dt": 0.02, "t_end": 1
        }"#;
        let msg = parse_config(text).unwrap_err().to_string();
        assert!(msg.contains("h0 not Hermitian"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_errors_with_position() {
        let text = BENCHMARK.replace("\"dt\": 0.02", "\"dt\": 0.02, \"colour\": 3");
        let msg = parse_config(&text).unwrap_err().to_string();
        assert!(msg.contains("colour") && msg.contains("line"), "{msg}");
        let text = BENCHMARK.replace("\"rise_time\": 0.1", "\"rise_time\": 0.1, \"slope\": 1");
        assert!(parse_config(&text).unwrap_err().to_string().contains("slope"));
    }

    #[test]
    fn malformed_json_reports_position() {
        let msg = parse_config("{\n  \"model\": ,\n}").unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn round_trip_is_identical() {
        let mut cfg = parse_config(BENCHMARK).unwrap();
        cfg.oracle = Some(OracleSpec { bandwidth: 2.0, levels: 400, dt: 0.005, init: InitSpec::PartitionFree, window: Some(20.0) });
        cfg.rule = RuleSpec::Tabulated { times: vec![0.0, 1.0], shifts: vec![vec![vec![[0.0, 0.0]]], vec![vec![[0.5, 0.0]]]] };
        cfg.sweep = vec![SweepEntry { label: "c".into(), set: serde_json::json!({"dt": 0.01}) }];
        let back = parse_config(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn sweep_merges_overrides() {
        let mut cfg = parse_config(BENCHMARK).unwrap();
        cfg.sweep = vec![
            SweepEntry { label: "a".into(), set: serde_json::json!({}) },
            SweepEntry { label: "d".into(), set: serde_json::json!({"model": {"lambda_l": 0.04, "lambda_r": 0.04}}) },
        ];
        let runs = cfg.expand_sweep().unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[1].0.as_deref(), Some("d"));
        assert_eq!(runs[1].1.model, ModelSpec::SingleSite { eps_d: 0.0, lambda_l: 0.04, lambda_r: 0.04, mu0: 0.0 });
        assert!(runs[0].1.sweep.is_empty());
    }

    #[test]
    fn bad_sweep_entries() {
        let mut cfg = parse_config(BENCHMARK).unwrap();
        cfg.sweep = vec![SweepEntry { label: "x".into(), set: serde_json::json!({"dt": -1}) }];
        assert!(cfg.expand_sweep().is_err());
        cfg.sweep = vec![SweepEntry { label: "../x".into(), set: serde_json::json!({}) }];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn oracle_grid_must_nest() {
        let mut cfg = parse_config(BENCHMARK).unwrap();
        cfg.oracle = Some(OracleSpec { bandwidth: 2.0, levels: 400, dt: 0.003, init: InitSpec::PartitionFree, window: None });
        assert!(cfg.validate().is_err());
        cfg.oracle.as_mut().unwrap().dt = 0.005;
        assert_eq!(cfg.oracle_decimation(cfg.oracle.as_ref().unwrap()).unwrap(), 4);
    }
}
