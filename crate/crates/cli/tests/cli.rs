use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn qtran(args: &[&str]) -> Output {
    qtran_env(args, &[])
}

fn qtran_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qtran"));
    c.args(args).env_remove("QTRAN_EPS_MIN");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("spawn qtran")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn write_cfg(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn column(csv: &str, idx: usize) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

const SINGLE_SITE: &str = r#"{
  "model": {"kind": "single_site", "eps_d": 0.0, "lambda_l": 0.1, "lambda_r": 0.1, "mu0": 0.0},
  "bias": {"left": {"kind": "zero"}, "right": {"kind": "smooth_step", "amplitude": -2.0, "rise_time": 0.1}},
  "rule": "half_sum",
  "dissipator": "wbl_adiabatic",
  "dt": 0.02,
  "t_end": 5.0
}"#;

#[test]
fn propagate_writes_trace_and_script() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("trace.csv");
    let o = qtran(&["propagate", "--config", &cfg("benchmark.json"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t_fs,J_L_uA,J_R_uA,trace_sigma,occ_0");
    assert_eq!(csv.lines().count(), 3002);
    let jr = column(&csv, 2);
    assert_eq!(jr[0], 0.0);
    let peak = jr.iter().cloned().fold(0.0, f64::max);
    let tail = jr[jr.len() - 250..].iter().sum::<f64>() / 250.0;
    assert!(peak > 1.01 * tail);
    assert!((tail - 42.565).abs() < 0.05, "{tail}");
    let script = fs::read_to_string(dir.path().join("trace.gp")).unwrap();
    assert!(script.contains("plot 'trace.csv'"));
}

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = TempDir::new().unwrap();
    let c = write_cfg(&dir, "c.json", SINGLE_SITE);
    let a = qtran(&["propagate", "--config", &c]);
    let b = qtran(&["propagate", "--config", &c]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn zero_bias_has_no_current() {
    let o = qtran(&["steady", "--config", &cfg("zero_bias.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("J_L = 0.00000000000e0 uA") || s.contains("J_L = -0.00000000000e0 uA"), "{s}");
    let t = qtran(&["propagate", "--config", &cfg("zero_bias.json")]);
    let jl = column(&stdout(&t), 1);
    assert!(jl.iter().all(|j| j.abs() < 1e-6));
}

#[test]
fn steady_matches_settled_transient() {
    let o = qtran(&["steady", "--config", &cfg("benchmark.json")]);
    let s = stdout(&o);
    assert!(s.starts_with("J_L = -4.2564"), "{s}");
    assert!(s.contains("J_R = 4.2564"), "{s}");
}

#[test]
fn iv_table_is_odd_free_and_monotone() {
    let o = qtran(&["steady", "--config", &cfg("chain_iv.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert_eq!(s.lines().next().unwrap(), "V_volt,J_L_uA,J_R_uA");
    let jl = column(&s, 1);
    let jr = column(&s, 2);
    assert_eq!(jr.len(), 8);
    assert_eq!(jr[0], 0.0);
    for k in 0..jr.len() {
        assert!((jl[k] + jr[k]).abs() < 1e-9 * (1.0 + jr[k].abs()));
    }
    assert!(jr.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn ground_state_prints_occupations() {
    let o = qtran(&["ground-state", "--config", &cfg("chain_iv.json")]);
    assert!(o.status.success());
    let s = stdout(&o);
    let occ: Vec<f64> = s
        .lines()
        .filter_map(|l| l.strip_prefix("occ_"))
        .map(|l| l.split(" = ").nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(occ.len(), 4);
    assert!((occ.iter().sum::<f64>() - 4.0).abs() < 1e-8);
}

#[test]
fn transmission_sweep() {
    let o = qtran(&["transmission", "--config", &cfg("chain_iv.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert_eq!(s.lines().next().unwrap(), "energy_eV,T,T_over_2pi");
    assert_eq!(s.lines().count(), 602);
    let t = column(&s, 1);
    assert!(t.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
    assert!(t.iter().cloned().fold(0.0, f64::max) > 0.99);
}

#[test]
fn transmission_needs_its_section() {
    let o = qtran(&["transmission", "--config", &cfg("zero_bias.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("CONFIG: validation error:"));
}

#[test]
fn empty_document_lists_every_missing_key() {
    let dir = TempDir::new().unwrap();
    let c = write_cfg(&dir, "e.json", "{}");
    let o = qtran(&["propagate", "--config", &c]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.starts_with("CONFIG: validation error:"), "{e}");
    for k in ["model", "bias", "rule", "dissipator", "dt", "t_end"] {
        assert!(e.contains(k), "{e}");
    }
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let c = write_cfg(&dir, "m.json", "{\"model\": ");
    let o = qtran(&["check", "--config", &c]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("CONFIG: parse error:"), "{}", stderr(&o));
}

#[test]
fn non_hermitian_h0_is_rejected() {
    let dir = TempDir::new().unwrap();
    let body = SINGLE_SITE.replace(
        r#"{"kind": "single_site", "eps_d": 0.0, "lambda_l": 0.1, "lambda_r": 0.1, "mu0": 0.0}"#,
        r#"{"kind": "matrices", "h0": [[[0.0, 0.0], [1.0, 0.0]], [[0.5, 0.0], [0.0, 0.0]]],
            "lambda_l": [[[0.1, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.1, 0.0]]],
            "lambda_r": [[[0.1, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.1, 0.0]]], "mu0": 0.0}"#,
    );
    let c = write_cfg(&dir, "h.json", &body);
    let o = qtran(&["propagate", "--config", &c]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).to_lowercase().contains("hermitian"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = qtran(&["propagate", "--config", "/nonexistent/run.json"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("IO:"), "{}", stderr(&o));
}

#[test]
fn eps_min_override_is_validated() {
    let dir = TempDir::new().unwrap();
    let c = write_cfg(&dir, "c.json", SINGLE_SITE);
    for bad in ["abc", "0.5"] {
        let o = qtran_env(&["ground-state", "--config", &c], &[("QTRAN_EPS_MIN", bad)]);
        assert_eq!(o.status.code(), Some(2), "{bad}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("CONFIG:"), "{}", stderr(&o));
    }
    let o = qtran_env(&["ground-state", "--config", &c], &[("QTRAN_EPS_MIN", "-500")]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn sweep_writes_one_file_per_label() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = qtran(&["propagate", "--config", &cfg("benchmark_sweep.json"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for l in ["a", "b", "c", "d"] {
        let csv = fs::read_to_string(dir.path().join(format!("sweep_{l}.csv"))).unwrap();
        assert!(csv.starts_with("t_fs,"));
    }
    let s = stdout(&o);
    assert!(s.find("[a]").unwrap() < s.find("[d]").unwrap());
}

#[test]
fn sweep_without_output_is_rejected() {
    let o = qtran(&["steady", "--config", &cfg("benchmark_sweep.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_reports_deviation() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.csv");
    let o = qtran(&["oracle", "--config", &cfg("oracle_w2.json"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("max relative deviation over [0, 20] fs:"), "{s}");
    assert!(fs::read_to_string(&out).unwrap().starts_with("t_fs,J_L_uA"));
}

#[test]
fn check_round_trips() {
    let dir = TempDir::new().unwrap();
    for name in ["benchmark.json", "benchmark_sweep.json", "zero_bias.json", "oracle_w2.json", "chain_iv.json"] {
        let once = qtran(&["check", "--config", &cfg(name)]);
        assert!(once.status.success(), "{name}: {}", stderr(&once));
        let c = write_cfg(&dir, name, &stdout(&once));
        let twice = qtran(&["check", "--config", &c]);
        assert_eq!(once.stdout, twice.stdout, "{name}");
    }
}

#[test]
fn verify_subset_passes() {
    let o = qtran(&["verify", "--only", "1,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 2);
    assert!(s.lines().all(|l| l.contains("PASS")), "{s}");
}

#[test]
fn verify_rejects_unknown_criteria() {
    let o = qtran(&["verify", "--only", "11"]);
    assert_eq!(o.status.code(), Some(2));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn steady_current_flips_with_bias(eps in -1.0f64..1.0, v in 0.1f64..3.0) {
        let dir = TempDir::new().unwrap();
        let body = |v: f64| SINGLE_SITE
            .replace("\"eps_d\": 0.0", &format!("\"eps_d\": {eps}"))
            .replace("\"amplitude\": -2.0", &format!("\"amplitude\": {v}"));
        let up = qtran(&["steady", "--config", &write_cfg(&dir, "u.json", &body(v))]);
        let down = qtran(&["steady", "--config", &write_cfg(&dir, "d.json", &body(-v))]);
        prop_assert!(up.status.success() && down.status.success());
        let jr = |o: &Output| -> f64 {
            let s = stdout(o);
            s.lines().nth(1).unwrap().split_whitespace().nth(2).unwrap().parse().unwrap()
        };
        // Raising the right lead drives current out of it.
        prop_assert!(jr(&up) < 0.0);
        prop_assert!(jr(&down) > 0.0);
    }
}
