//! End-to-end tests of the `lambscat` binary: exit codes, file outputs,
//! config round-trip and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lambscat"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

const LAMB: &str = r#"
[model.lamb_chain]
masses = [1.0]
springs = [1.0]
tension = 1.0

[data]
[[data.phi0]]
kind = "gaussian"
amplitude = 1.0
center = 5.0
sigma = 1.0

[sim]
t_final = 20.0
dt = 1e-3
snapshot_times = [0.0, 6.0]
snapshot_x_max = 15.0
snapshot_points = 61
decay_window = [10.0, 20.0]

[scatter]
x_max = 40.0
h = 0.02
"#;

#[test]
fn analyze_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LAMB);
    let out = run(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/analysis.json")).unwrap())
            .unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["polynomial"]["coeffs_closed_form"], serde_json::json!([1.0, -1.0, 1.0]));
    assert_eq!(report["pp_empty"], true);
    let roots = report["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 2);
    for r in roots {
        assert_eq!(r["class"], "resonance");
        assert!((r["re"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    }
}

#[test]
fn duplicate_eigenvalues_exit_code_two_with_tag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\neigenvalues = [-1.0, -1.0]\ncoupling = [1.0, 1.0]\n",
    );
    let out = run(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error[DuplicateEigenvalue]"), "stderr: {err}");
}

#[test]
fn scatter_bound_state_exit_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[model.pauli_fierz]
m = 1.0
omega = 1.0
e = 1.0

[data]
[[data.phi0]]
kind = "gaussian"
amplitude = 1.0
center = 5.0
sigma = 1.0

[scatter]
x_max = 40.0
h = 0.02
"#,
    );
    let out = run(&["scatter", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error[PointSpectrumPresent]"), "stderr: {err}");
}

#[test]
fn scatter_outputs_transfer_row_at_zero_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LAMB);
    let o = dir.path().join("o");
    let out = run(&[
        "scatter",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        o.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // transfer.csv row at kappa = 0 must be s = -1 + 0i
    let transfer = std::fs::read_to_string(o.join("transfer.csv")).unwrap();
    let zero_row = transfer
        .lines()
        .find(|l| l.starts_with("0.0000000000000000e0,"))
        .expect("kappa = 0 row");
    let cols: Vec<f64> = zero_row.split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(cols[1], -1.0);
    assert_eq!(cols[2], 0.0);
    assert_eq!(cols[3], 1.0);

    let checks: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o.join("checks.json")).unwrap()).unwrap();
    assert!(checks["dft_relation_error"].as_f64().unwrap() <= 1e-3);
    assert!(checks["parseval"]["rel_residual_plus"].as_f64().unwrap() <= 1e-3);
    assert!(checks["covariance_sup_discrepancy"].as_f64().unwrap() <= 1e-6);
    assert!(o.join("reps.csv").exists());
}

#[test]
fn simulate_writes_trajectory_snapshots_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LAMB);
    let o = dir.path().join("o");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        o.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["state_dim"], 2);
    assert!(summary["energy_drift"].as_f64().unwrap() <= 1e-6);
    assert!(summary["boundary_residual_max"].as_f64().unwrap() <= 1e-8);
    let slope = summary["decay_fit"]["slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() <= 0.05, "slope {slope}");

    let traj = std::fs::read_to_string(o.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,y1,ydot1,b,E,E_drift\n"));
    let snaps = std::fs::read_to_string(o.join("snapshots.csv")).unwrap();
    assert!(snaps.starts_with("t,x,phi,phidot\n"));
    assert_eq!(snaps.lines().count(), 1 + 2 * 61);
}

#[test]
fn simulate_zero_data_writes_zero_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[model.lamb_chain]
masses = [1.0]
springs = [1.0]
tension = 1.0

[data]

[sim]
t_final = 2.0
dt = 1e-2
"#,
    );
    let o = dir.path().join("o");
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let traj = std::fs::read_to_string(o.join("trajectory.csv")).unwrap();
    for line in traj.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        for v in &cols[1..] {
            assert_eq!(*v, 0.0, "line {line}");
        }
    }
}

#[test]
fn nonlinear_quartic_run_reports_growth_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[model.lamb_chain]
masses = [1.0]
springs = [1.0]
tension = 1.0

[data]
[[data.phi0]]
kind = "gaussian"
amplitude = 1.0
center = 5.0
sigma = 1.0

[sim]
t_final = 10.0
dt = 1e-3

[nonlinear]
v = "y^4 + y^2"
grad = ["4*y^3 + 2*y"]
"#,
    );
    let o = dir.path().join("o");
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o.join("summary.json")).unwrap()).unwrap();
    assert!(summary["energy_drift"].as_f64().unwrap() <= 1e-6);
    assert_eq!(summary["growth_condition"], "satisfied");
}

#[test]
fn lp_acoustic_shell_dimension_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model.acoustic_shell]\nmass = 1.0\nyoung = 1.0\nradius = 1.0\n",
    );
    let o = dir.path().join("o");
    let out = run(&["lp", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o.join("lp.json")).unwrap()).unwrap();
    assert_eq!(report["dim"], 3);
    assert_eq!(report["polynomial_degree"], 3);
    for s in report["contraction"].as_array().unwrap() {
        assert!(s["gram_norm"].as_f64().unwrap() <= 1.0 + 1e-10);
    }
}

#[test]
fn lp_n2_theta_zero_dimension_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\neigenvalues = [-1.0, -2.0]\ncoupling = [1.0, 1.0]\ntheta = 0.0\n",
    );
    let o = dir.path().join("o");
    let out = run(&["lp", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o.join("lp.json")).unwrap()).unwrap();
    assert_eq!(report["dim"], 4);
}

#[test]
fn dump_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LAMB);
    let out = run(&["analyze", "--config", cfg.to_str().unwrap(), "--dump-config"]);
    assert!(out.status.success());
    let dumped = String::from_utf8(out.stdout).unwrap();
    let reparsed = lambscat::config::RunConfig::parse(&dumped).unwrap();
    let original = lambscat::config::RunConfig::parse(LAMB).unwrap();
    assert_eq!(reparsed, original);
}

#[test]
fn identical_configs_give_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LAMB);
    for sub in ["a", "b"] {
        let out = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().join(sub).to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    for name in ["trajectory.csv", "snapshots.csv", "summary.json"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn sweep_runs_parallel_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\neigenvalues = [-1.0]\ncoupling = [1.0]\ntheta = -0.5\n",
    );
    let o = dir.path().join("o");
    let out = bin()
        .args([
            "analyze",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            o.to_str().unwrap(),
            "--sweep",
            "model.theta=-1.0:-0.25:4",
        ])
        .env("LAMBSCAT_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let mut dirs: Vec<_> = std::fs::read_dir(&o)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    dirs.sort();
    assert_eq!(dirs.len(), 4);
    assert!(dirs[0].starts_with("sweep_000_model.theta=-1"));
    for d in &dirs {
        assert!(o.join(d).join("analysis.json").exists());
    }
}

#[test]
fn missing_blocks_rejected_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[model]\neigenvalues = [-1.0]\ncoupling = [1.0]\n");
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[Config]"));
}
