use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mms-lab"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, value: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, value.to_string()).unwrap();
    path
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

fn error_line(output: &Output) -> Value {
    let text = String::from_utf8(output.stderr.clone()).unwrap();
    assert_eq!(text.trim().lines().count(), 1, "stderr: {text}");
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn bvy_two_point_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run("bvy", &fixture("bvy_two_point.json"), &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["scalars"]["value"], json!(2.0));
    assert_eq!(s["subcommand"], json!("bvy"));
    assert_eq!(s["provenance"]["library_version"], json!(mms_core::VERSION));
    assert_eq!(s["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(out.join("level_sets.csv")).unwrap();
    assert!(csv.starts_with("ratio,tail_weight,lambda_p_weight\n"));
}

#[test]
fn malformed_json_is_a_validation_error_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, "{ \"space\": ").unwrap();
    let out = tmp.path().join("out");
    let o = run("bvy", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["exit_code"], json!(2));
    assert!(!out.exists());
}

#[test]
fn unknown_field_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &json!({ "space": { "generator": "grid", "dim": 1, "side": 4 }, "colour": 1 }),
    );
    let o = run("space-gen", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_five() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "frobnicate",
        &fixture("bvy_two_point.json"),
        &tmp.path().join("out"),
        &[],
    );
    assert_eq!(o.status.code(), Some(5));
    assert_eq!(error_line(&o)["error"], json!("unknown-subcommand"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "bvy",
        &tmp.path().join("absent.json"),
        &tmp.path().join("out"),
        &[],
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn randomized_config_requires_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run("covering", &fixture("covering_random.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = run(
        "covering",
        &fixture("covering_random.json"),
        &out,
        &["--seed", "5"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["provenance"]["seed"], json!(5));
    assert_eq!(s["flags"]["contained_at_3"], json!(true));
}

#[test]
fn seed_changes_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(
        "stability",
        &fixture("stability_random.json"),
        &a,
        &["--seed", "1"]
    )
    .status
    .success());
    assert!(run(
        "stability",
        &fixture("stability_random.json"),
        &b,
        &["--seed", "2"]
    )
    .status
    .success());
    assert_ne!(
        summary(&a)["provenance"]["config_hash"],
        summary(&b)["provenance"]["config_hash"]
    );
}

#[test]
fn subcommand_mismatch_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "seminorm",
        &fixture("bvy_two_point.json"),
        &tmp.path().join("out"),
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_iteration_cap_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &json!({
            "space": { "generator": "grid", "dim": 1, "side": 24 },
            "rhs": { "rule": "sin" },
            "boundary": { "grid_faces": true, "values": { "rule": "constant", "value": 0.0 } },
            "params": { "s": 0.5, "p": 3.0 },
            "solver": { "max_iter": 2 }
        }),
    );
    let out = tmp.path().join("out");
    let o = run("nonlocal-solve", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(summary(&out)["flags"]["converged"], json!(false));
}

#[test]
fn solve_fixture_converges_with_holder_probe() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run("nonlocal-solve", &fixture("solve_p3.json"), &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["flags"]["converged"], json!(true));
    assert!(s["scalars"]["residual"].as_f64().unwrap() < 1e-8);
    assert!(s["scalars"]["holder_seminorm"].as_f64().unwrap() > 0.0);
}

#[test]
fn bbm_fixture_reports_table_and_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run("bbm", &fixture("bbm_acceptance.json"), &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("bbm.csv")).unwrap();
    assert!(csv.starts_with("s,n,value,rel_error,diagonal\n"));
    assert_eq!(csv.lines().count(), 6);
    let s = summary(&out);
    assert!(s["flags"]["pass"].is_boolean());
    assert_eq!(s["scalars"]["c_hat"], json!(2.0));
}

#[test]
fn every_subcommand_runs_on_a_small_config() {
    let grid = json!({ "generator": "grid", "dim": 1, "side": 16 });
    let plane = json!({ "generator": "grid", "dim": 2, "side": 5 });
    let sin = json!({ "rule": "sin" });
    let configs = [
        ("space-gen", json!({ "space": grid })),
        (
            "bvy",
            json!({ "space": grid, "field": sin, "params": { "p": 2.0 } }),
        ),
        (
            "seminorm",
            json!({ "space": grid, "field": sin, "params": { "s": 0.5, "p": 2.0 } }),
        ),
        (
            "orlicz",
            json!({ "space": grid, "field": sin, "params": { "s": 0.5, "phi": { "kind": "power-log", "p": 1.5 } } }),
        ),
        (
            "varexp",
            json!({
                "space": grid, "field": sin,
                "params": { "s": 0.4, "exponent": { "rule": "linear", "coefficients": [1.0], "offset": 1.5 } }
            }),
        ),
        (
            "anisotropic",
            json!({
                "space": plane, "field": { "rule": "linear", "coefficients": [1.0, -2.0] },
                "params": { "p": 2.0, "matrix": [[2.0, 0.5], [0.0, 1.0]] }
            }),
        ),
        (
            "covering",
            json!({
                "space": plane,
                "covering": { "balls": { "kind": "list", "balls": [
                    { "center": 0, "radius": 0.3 }, { "center": 12, "radius": 0.3 }, { "center": 24, "radius": 0.2 }
                ] }, "radius_bound": 0.5 }
            }),
        ),
        (
            "nonlocal-apply",
            json!({ "space": grid, "field": sin, "params": { "s": 0.5, "p": 2.5 } }),
        ),
        (
            "nonlocal-solve",
            json!({
                "space": grid, "rhs": { "rule": "constant", "value": 1.0 },
                "boundary": { "points": [0, 15], "values": { "rule": "constant", "value": 0.0 } },
                "params": { "s": 0.5, "p": 2.0 }
            }),
        ),
        (
            "poincare",
            json!({
                "space": grid, "field": sin, "ball": { "center": 8, "radius": 0.3 }, "params": { "s": 0.5, "p": 2.0 }
            }),
        ),
        (
            "equivalence",
            json!({ "field": sin, "grids": { "n": [16, 32] }, "params": { "s": 0.5, "p": 2.0 } }),
        ),
        (
            "kfunc",
            json!({
                "space": grid, "field": sin, "params": { "s1": 0.5, "p1": 2.0, "p": 2.0 },
                "grids": { "t": [0.01, 0.1, 1.0], "delta": [0.1, 0.2] }
            }),
        ),
        (
            "interp",
            json!({ "grids": { "n": [16, 32] }, "field": sin, "params": { "theta": 0.5, "s1": 0.3, "p1": 2.0 } }),
        ),
        (
            "bbm",
            json!({
                "field": { "rule": "bump", "center": [0.5], "width": 0.25 },
                "params": { "p": 2.0 }, "grids": { "s": [0.6, 0.7], "n": [32, 64] }
            }),
        ),
        (
            "sharpness",
            json!({
                "sharpness": { "profiles": ["triangle", "c2"] }, "grids": { "delta": [0.25, 0.125] }, "params": { "p": 2.0 }
            }),
        ),
        (
            "stability",
            json!({
                "space": grid, "field": sin, "fields": [{ "rule": "sin", "frequency": 2.0 }],
                "grids": { "eps": [0.1, 0.01] }, "params": { "p": 2.0 }
            }),
        ),
    ];
    assert_eq!(configs.len(), mms_lab::SUBCOMMANDS.len());
    let tmp = tempfile::tempdir().unwrap();
    for (sub, cfg) in configs {
        let dir = tmp.path().join(sub);
        std::fs::create_dir_all(&dir).unwrap();
        let path = write_config(&dir, &cfg);
        let out = dir.join("out");
        let o = run(sub, &path, &out, &[]);
        assert!(
            o.status.success(),
            "{sub}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let s = summary(&out);
        assert_eq!(s["subcommand"], json!(sub));
        assert!(
            !s["scalars"].as_object().unwrap().is_empty()
                || !s["flags"].as_object().unwrap().is_empty(),
            "{sub}"
        );
    }
}
