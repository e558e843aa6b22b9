use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn lab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("run lab")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const SMALL_GRID: &str = r#"{"dim":1,"half_width":256.0,"points":1024}"#;

#[test]
fn criteria_worked_tuple_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lab(&[
        "criteria", "--out", out, "--set", "dim=2", "--set", "s=\"1/2\"", "--set", "rho=\"-1/2\"", "--set", "p=3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    let w = &r["results"]["r_window"];
    assert_eq!(w["lower"]["exact"], "1/12");
    assert_eq!(w["upper"]["exact"], "1/4");
    assert_eq!(w["mu"]["exact"], "1/6");
    assert_eq!(w["mu_residual"]["exact"], "0");
    assert_eq!(r["results"]["p_f"]["exact"], "3/2");
    assert_eq!(r["config"]["s"], "1/2");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(lab(&["evolve", "--out", out, "--set", "nonsense=1"]).status.code(), Some(2));
    assert_eq!(lab(&["evolve", "--out", out, "--set", "problem.s=1.5"]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(lab(&["sweep", "--config", bad.to_str().unwrap(), "--out", out]).status.code(), Some(2));
    assert_eq!(lab(&["sweep", "--out", out, "--set", "axes.q=[1]"]).status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["kernel", "--config", "/nonexistent/cfg.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/cfg.json"));
}

#[test]
fn resolution_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["kernel", "--out", dir.path().to_str().unwrap(), "--set", "inversion.max_nodes=64"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn kernel_writes_profile_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["kernel", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    assert!(csv.starts_with("# columns"));
    assert_eq!(csv.lines().count(), 2 + 21);
    assert!(dir.path().join("kernel.csv.json").exists());
    assert_eq!(report(dir.path())["results"]["bounds"]["all_positive"], true);
}

#[test]
fn single_evolve_writes_one_series_and_one_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let grid = format!("problem.grid={SMALL_GRID}");
    let o = lab(&["evolve", "--out", out, "--set", &grid, "--set", "problem.p=3", "--set", "tgrid.horizon=2", "--set", "tgrid.steps=50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 2);
    let r = report(dir.path());
    assert_eq!(r["runs"].as_array().unwrap().len(), 1);
    assert_eq!(r["config"]["options"]["convergence_guard"], true);
    assert_eq!(r["config"]["problem"]["p"], 3.0);
    assert!(r["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

fn nine_tuple_sweep(out: &str) -> std::process::Output {
    let grid = format!("fixed.grid={SMALL_GRID}");
    lab(&[
        "sweep", "--out", out, "--set", &grid, "--set", "axes.p=[1.5,2,3]", "--set", "axes.amplitude=[0.1,0.5,1]",
        "--set", "tgrid.horizon=2", "--set", "tgrid.steps=40", "--set", "options.convergence_guard=false",
    ])
}

#[test]
fn sweep_writes_series_per_tuple_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = nine_tuple_sweep(a.path().to_str().unwrap());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(nine_tuple_sweep(b.path().to_str().unwrap()).status.success());
    let series = std::fs::read_dir(a.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("run_"))
        .count();
    assert_eq!(series, 9);
    let csv_a = std::fs::read(a.path().join("sweep.csv")).unwrap();
    let csv_b = std::fs::read(b.path().join("sweep.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 10);
    let r = report(a.path());
    assert_eq!(r["results"]["tuples"], 9);
    assert_eq!(r["results"]["rows"], 9);
}

#[test]
fn echoed_config_reproduces_the_sweep() {
    let a = tempfile::tempdir().unwrap();
    assert!(nine_tuple_sweep(a.path().to_str().unwrap()).status.success());
    let echoed = report(a.path())["config"].clone();
    let cfg = a.path().join("echo.json");
    std::fs::write(&cfg, serde_json::to_string(&echoed).unwrap()).unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = lab(&["sweep", "--config", cfg.to_str().unwrap(), "--out", b.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(b.path())["config"], echoed);
    assert_eq!(
        std::fs::read(a.path().join("sweep.csv")).unwrap(),
        std::fs::read(b.path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn rvf_and_testfn_run_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["rvf", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(dir.path())["results"]["ratio_test"]["ratios"].as_array().unwrap().len(), 6);

    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["testfn", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert!(r["results"]["slope_gap"].as_f64().unwrap() < 0.0);
    assert!(dir.path().join("testfn.csv").exists());
}

#[test]
fn testfn_radius_beyond_quarter_width_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["testfn", "--out", dir.path().to_str().unwrap(), "--set", "r_values=[64,2048]"]);
    assert_eq!(o.status.code(), Some(2));
}
