use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_netlq");

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn netlq(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn netlq_threads(args: &[&str], threads: &str) -> Output {
    Command::new(BIN).args(args).env("NETLQ_THREADS", threads).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_ok(args: &[&str]) -> Output {
    let o = netlq(args);
    assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    o
}

fn scenario(name: &str) -> String {
    scenarios().join(name).to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gains_reports_the_recursion() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["gains", "--scenario", &scenario("example1.json"), "--out", out]);
    let rows = read_csv(&dir.path().join("gains.csv"));
    assert_eq!(rows[0], vec!["t", "k_star", "beta", "lambda", "alpha"]);
    let k0: f64 = rows[1][1].parse().unwrap();
    assert!((k0 - 0.6655629139072848).abs() < 1e-15);
    assert_eq!(rows[3][2], "1");
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("gains.json")).unwrap()).unwrap();
    assert_eq!(json["k_star"].as_array().unwrap().len(), 2);
    assert_eq!(json["beta"].as_array().unwrap().len(), 3);
}

#[test]
fn dual_effect_figure_has_curves_and_markers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["fig-dual-effect", "--scenario", &scenario("example1.json"), "--out", out]);
    let gamma = read_csv(&dir.path().join("gamma.csv"));
    let cost = read_csv(&dir.path().join("cost.csv"));
    assert_eq!(gamma[0], vec!["u0", "gamma"]);
    assert_eq!(cost[0], vec!["u0", "cost"]);
    assert_eq!(gamma.len(), 1002);
    let markers = read_csv(&dir.path().join("markers.csv"));
    assert_eq!(markers[1][0], "u0_ce");
    let ce: f64 = markers[1][1].parse().unwrap();
    let best: f64 = markers[2][1].parse().unwrap();
    assert!((ce + 1.3311258278145695).abs() < 1e-12);
    assert!((best - ce).abs() > 0.5);
}

#[test]
fn manifest_and_provenance_share_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["fig-example3", "--scenario", &scenario("example3.json"), "--out", out, "--seed", "5"]);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let prov: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("provenance.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"], prov["config_hash"]);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    for f in manifest["files"].as_array().unwrap() {
        let name = f["file"].as_str().unwrap();
        let header = read_csv(&dir.path().join(name)).remove(0);
        let cols: Vec<&str> = f["columns"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
        assert_eq!(header, cols);
        assert!(f["columns"].as_array().unwrap().iter().all(|c| c["unit"].is_string()));
    }
    assert_eq!(prov["seed"], 5);
    assert_eq!(prov["sources"]["experiment.seed"], "override");
    assert_eq!(prov["sources"]["plant.a"], "file");
    assert_eq!(prov["sources"]["cost.m"], "default");
    assert_eq!(prov["config"]["plant"]["x0"]["mu"], 0.5);
    assert!(prov["version"].is_string());
}

#[test]
fn example3_curves_depend_on_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["fig-example3", "--scenario", &scenario("example3.json"), "--out", out]);
    let values: Vec<f64> =
        read_csv(&dir.path().join("error_variance.csv")).iter().skip(1).map(|r| r[1].parse().unwrap()).collect();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo > 1e-2, "{lo} {hi}");
}

fn minima(dir: &Path) -> Vec<f64> {
    read_csv(&dir.join("minima.csv")).iter().skip(1).map(|r| r[2].parse().unwrap()).collect()
}

fn spread(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[test]
fn symmetry_figures_agree_then_break() {
    let base = tempfile::tempdir().unwrap();
    let mut spreads = Vec::new();
    for cmd in ["fig-symmetry", "fig-constrained-encoder", "fig-constrained-control", "fig-interval-control"] {
        let d = base.path().join(cmd);
        run_ok(&[cmd, "--scenario", &scenario("example4.json"), "--out", d.to_str().unwrap()]);
        spreads.push(spread(&minima(&d)));
    }
    assert!(spreads[0] < 1e-6, "{spreads:?}");
    assert!(spreads[1..].iter().all(|&s| s > 1e-4), "{spreads:?}");
    let policy = read_csv(&base.path().join("fig-constrained-control/policy.csv"));
    let switch: Vec<(f64, f64)> = policy
        .windows(2)
        .skip(1)
        .filter(|w| w[0][1] != w[1][1])
        .map(|w| (w[0][0].parse().unwrap(), w[1][0].parse().unwrap()))
        .collect();
    assert_eq!(switch.len(), 2);
    for ((lo, hi), at) in switch.into_iter().zip([-1.0, 1.0]) {
        assert!(lo - 1e-9 <= at && at <= hi + 1e-9, "{lo} {hi}");
    }
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let base = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4", "4"].iter().enumerate() {
        let d = base.path().join(k.to_string());
        let o = netlq_threads(
            &["simulate", "--scenario", &scenario("example1.json"), "--out", d.to_str().unwrap(), "--paths", "3000", "--seed", "11"],
            threads,
        );
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push((fs::read(d.join("sweep.csv")).unwrap(), fs::read(d.join("manifest.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn simulate_without_sweep_writes_one_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&[
        "simulate",
        "--scenario",
        &scenario("example1.json"),
        "--out",
        out,
        "--paths",
        "2000",
        "--set",
        "experiment.sweep=null",
    ]);
    let rows = read_csv(&dir.path().join("result.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][2], "2000");
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert!(json["mean_cost"].as_f64().unwrap() > 0.0);
}

#[test]
fn envelope_design_on_a_short_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_file(
        dir.path(),
        "env.json",
        r#"{"plant": {"a": 1.0, "sigma_w": 0.5, "x0": {"mu": 2.0, "sigma": 0.0}, "horizon": 2},
            "cost": {"p": 1.0, "q": 0.2},
            "experiment": {"envelope": {"points": 201, "shifts": [0.0], "kappa_starts": [0.0]}}}"#,
    );
    let out = dir.path().join("out");
    run_ok(&["et-envelope", "--scenario", &sc, "--out", out.to_str().unwrap()]);
    let summary = read_csv(&out.join("summary.csv"));
    assert_eq!(summary[0], vec!["law", "design", "expected_cost", "kappa", "asymmetry"]);
    assert_eq!(summary.len(), 5);
    for law in [1, 3] {
        let sym: f64 = summary[law][2].parse().unwrap();
        let opt: f64 = summary[law + 1][2].parse().unwrap();
        assert!(opt <= sym + 1e-9, "{sym} {opt}");
    }
    assert_eq!(read_csv(&out.join("envelope.csv")).len(), 1 + 4 * 2);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = netlq(&[
        "et-envelope",
        "--scenario",
        &scenario("example8.json"),
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "experiment.envelope.width=2",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error code=grid_too_coarse "), "{err}");
}

#[test]
fn validate_expands_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_file(
        dir.path(),
        "min.json",
        r#"{"plant": {"a": 1, "sigma_w": 1, "x0": {"mu": 0, "sigma": 1}, "horizon": 1}, "cost": {"p": 1, "q": 1}}"#,
    );
    let o = run_ok(&["validate", "--scenario", &sc]);
    let text = stdout(&o);
    let source = |field: &str| {
        text.lines()
            .find(|l| l.split('\t').next() == Some(field))
            .unwrap_or_else(|| panic!("{field} missing:\n{text}"))
            .rsplit('\t')
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(source("plant.a"), "file");
    assert_eq!(source("cost.m"), "default");
    assert_eq!(source("channel.kind"), "default");
    assert_eq!(source("controller.kind"), "default");
    assert_eq!(source("noise.kind"), "default");
    assert_eq!(source("experiment.envelope.points"), "default");
    assert_eq!(source("experiment.seed"), "default");
    assert!(fs::read_dir(dir.path()).unwrap().count() == 1, "validate must not write files");
}

#[test]
fn validate_reports_override_provenance() {
    let o = run_ok(&["validate", "--scenario", &scenario("example4.json"), "--set", "cost.q=0.2"]);
    let line = stdout(&o).lines().find(|l| l.starts_with("cost.q\t")).unwrap().to_string();
    assert_eq!(line, "cost.q\t0.2\toverride");
}

#[test]
fn channel_encoder_mismatch_names_both_fields() {
    let o = netlq(&[
        "validate",
        "--scenario",
        &scenario("example4.json"),
        "--set",
        r#"channel={"kind":"event_triggered","n0":1,"m":0}"#,
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("channel.kind") && err.contains("encoder.kind"), "{err}");
}

#[test]
fn schema_violations_exit_2_with_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_file(
        dir.path(),
        "bad.json",
        r#"{"plant": {"a": 1, "sigma_w": 1, "x0": {"mu": 0, "sigma": 1}, "horizon": 1},
            "cost": {"p": 1, "q": 1}, "experiment": {"envelope": {"pointz": 3}}}"#,
    );
    let o = netlq(&["validate", "--scenario", &sc]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error code=schema_violation path=experiment.envelope.pointz "), "{}", stderr(&o));

    let o = netlq(&["gains", "--scenario", &sc, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());

    let o = netlq(&["validate", "--scenario", &scenario("example4.json"), "--set", "cost.q=-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("path=cost.q"));

    let o = netlq(&["validate", "--scenario", &scenario("example4.json"), "--set", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_ok(&["selftest", "--out", dir.path().to_str().unwrap()]);
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS ")));
    let rows = read_csv(&dir.path().join("selftest.csv"));
    assert!(rows.len() > 5);
}
