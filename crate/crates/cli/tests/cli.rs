//! End-to-end tests of the binary: exit codes, artifact layout and the
//! report merge.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nuelab")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn write_config(name: &str, content: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("summary.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

const DEVIATE_CONFIG: &str = r#"
[system]
family = "doubling"

[experiment]
kind = "deviate"
observable = "digit"
threshold = 0.8

[numeric]
n_grid = [8, 12, 16, 20]
m = 20000
seed = 90210
workers = 4

[output]
formats = ["csv", "json", "svg"]
"#;

#[test]
fn deviate_bundle_matches_the_oracle() {
    let cfg = write_config("cli-deviate.toml", DEVIATE_CONFIG);
    let out = tmp("cli-deviate-bundle");
    let res = run(&[
        "deviate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );

    let s = summary(&out);
    nuelab_cli::artifacts::validate_summary(&s).unwrap();
    assert_eq!(s["experiment"], "deviate");
    assert_eq!(s["oracle"]["monte_carlo_within_band"], true);
    let xi = s["oracle"]["exact_fit"]["xi"].as_f64().unwrap();
    assert!((xi - 0.193).abs() < 0.01, "exact-fit xi {xi}");
    // The hash commits to the CSV bytes.
    let csv = std::fs::read(out.join("results.csv")).unwrap();
    let expect = format!("sha256:{}", nuelab_cli::hash::git_blob_sha256(&csv));
    assert_eq!(s["results_hash"].as_str().unwrap(), expect);
    assert!(out.join("rate.svg").exists());
}

#[test]
fn escape_bundle_fits_log_two() {
    let cfg = write_config(
        "cli-escape.toml",
        r#"
[system]
family = "doubling"

[experiment]
kind = "escape"
region = [0.0, 0.5]

[numeric]
n_grid = [5, 7, 9, 11, 13, 15]
m = 200000
seed = 777
workers = 4
"#,
    );
    let out = tmp("cli-escape-bundle");
    let res = run(&[
        "escape",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let s = summary(&out);
    let xi = s["oracle"]["exact_fit"]["xi"].as_f64().unwrap();
    assert!((xi - 2.0_f64.ln()).abs() < 1e-9, "exact escape rate {xi}");
    let mc = s["fit"]["xi"].as_f64().unwrap();
    assert!(
        (mc - 2.0_f64.ln()).abs() < 0.05,
        "monte-carlo escape rate {mc}"
    );
}

#[test]
fn empty_n_grid_is_a_config_error() {
    let cfg = write_config(
        "cli-empty-grid.toml",
        r#"
[system]
family = "doubling"

[experiment]
kind = "deviate"
observable = "digit"
threshold = 0.8

[numeric]
n_grid = []
m = 2000
seed = 1
"#,
    );
    let res = run(&[
        "deviate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp("x1").to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn missing_seed_is_a_config_error() {
    let cfg = write_config(
        "cli-no-seed.toml",
        r#"
[system]
family = "doubling"

[numeric]
n_grid = [5]
m = 2000
"#,
    );
    let res = run(&["deviate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("seed"));
}

#[test]
fn unknown_family_and_bad_params_are_config_errors() {
    let cfg = write_config(
        "cli-bad-family.toml",
        r#"
[system]
family = "henon"

[numeric]
n_grid = [5]
m = 2000
seed = 1
"#,
    );
    let res = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("henon"));

    let cfg = write_config(
        "cli-bad-param.toml",
        r#"
[system]
family = "quadratic"

[system.params]
a = 3.5

[numeric]
n_grid = [5]
m = 2000
seed = 1
"#,
    );
    let res = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn kind_mismatch_is_a_config_error() {
    let cfg = write_config("cli-mismatch.toml", DEVIATE_CONFIG);
    let res = run(&["tail", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn report_merges_deviate_and_bound_bundles() {
    let dev_cfg = write_config("cli-report-dev.toml", DEVIATE_CONFIG);
    let dev_out = tmp("cli-report-dev-bundle");
    assert!(run(&[
        "deviate",
        "--config",
        dev_cfg.to_str().unwrap(),
        "--out",
        dev_out.to_str().unwrap()
    ])
    .status
    .success());

    let bound_cfg = write_config(
        "cli-report-bound.toml",
        r#"
[experiment]
kind = "bound"
model = "doubling_digit"
c_values = [0.8]

[numeric]
seed = 1
"#,
    );
    let bound_out = tmp("cli-report-bound-bundle");
    assert!(run(&[
        "bound",
        "--config",
        bound_cfg.to_str().unwrap(),
        "--out",
        bound_out.to_str().unwrap()
    ])
    .status
    .success());

    let report_out = tmp("cli-report-merge");
    let res = run(&[
        "report",
        "--out",
        report_out.to_str().unwrap(),
        dev_out.to_str().unwrap(),
        bound_out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let table = std::fs::read_to_string(report_out.join("comparison.csv")).unwrap();
    let mut lines = table.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("gap"));
    assert_eq!(lines.clone().count(), 2);

    // The deviate row pairs its fitted rate with the variational bound.
    let dev_row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let gap: f64 = dev_row.last().unwrap().parse().unwrap();
    assert!(gap.abs() < 0.02, "gap {gap}");
}

#[test]
fn bound_loads_models_from_json_files() {
    let model_path = tmp("cli-model.json");
    std::fs::create_dir_all(model_path.parent().unwrap()).unwrap();
    std::fs::write(
        &model_path,
        r#"{
            "alphabet": 2,
            "adjacency": [[1, 1], [1, 0]],
            "phi": [0.0, 1.0],
            "jacobian": [0.0, 0.0]
        }"#,
    )
    .unwrap();
    let cfg = write_config(
        "cli-bound-file.toml",
        &format!(
            r#"
[experiment]
kind = "bound"
model = "{}"
c_values = [0.3]

[numeric]
seed = 1
"#,
            model_path.display()
        ),
    );
    let out = tmp("cli-bound-file-bundle");
    let res = run(&["bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let s = summary(&out);
    // Unconstrained entropy of the golden-mean shift appears at t = 0.
    let p0 = s["metrics"]["pressure_at_zero"].as_f64().unwrap();
    assert!((p0 - 0.4812118250596035).abs() < 1e-10, "pressure {p0}");

    // A broken model file is a config error.
    std::fs::write(&model_path, "{\"alphabet\": 1}").unwrap();
    let res = run(&["bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn report_rejects_malformed_bundles() {
    let bad = tmp("cli-bad-bundle");
    std::fs::create_dir_all(&bad).unwrap();
    std::fs::write(bad.join("summary.json"), "{\"not\": \"a summary\"}").unwrap();
    let res = run(&[
        "report",
        "--out",
        tmp("x2").to_str().unwrap(),
        bad.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_numeric_failure() {
    let cfg = write_config("cli-unwritable.toml", DEVIATE_CONFIG);
    let blocker = tmp("cli-blocker");
    std::fs::create_dir_all(blocker.parent().unwrap()).unwrap();
    std::fs::write(&blocker, b"file, not a directory").unwrap();
    let out = blocker.join("bundle");
    let res = run(&[
        "deviate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn identical_seeds_give_identical_bundles() {
    let cfg = write_config("cli-det.toml", DEVIATE_CONFIG);
    let (o1, o2) = (tmp("cli-det-1"), tmp("cli-det-2"));
    for (out, workers) in [(&o1, "1"), (&o2, "6")] {
        assert!(run(&[
            "deviate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ])
        .status
        .success());
    }
    let a = std::fs::read(o1.join("results.csv")).unwrap();
    let b = std::fs::read(o2.join("results.csv")).unwrap();
    assert_eq!(a, b);
}
