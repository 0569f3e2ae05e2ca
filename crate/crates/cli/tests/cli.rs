use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn abring() -> Command {
    Command::new(env!("CARGO_BIN_EXE_abring"))
}

fn example() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenario.toml")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn run(args: &[&str], dir: &Path) -> std::process::Output {
    abring().args(args).arg("--out").arg(dir).output().unwrap()
}

#[test]
fn example_config_runs_every_experiment() {
    for exp in ["spectrum", "cycle", "holonomy", "w-convergence", "propagate", "phase-audit"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[exp, "--config", example()], dir.path());
        assert_eq!(out.status.code(), Some(0), "{exp}: {}", String::from_utf8_lossy(&out.stderr));
        let r = report(dir.path());
        assert_eq!(r["schema_version"], 1);
        assert_eq!(r["experiment"], exp);
        assert_eq!(r["passed"], true);
        assert_eq!(r["config"]["experiment"], exp);
    }
}

#[test]
fn matrices_use_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["holonomy", "--override", "window=[-3,3]", "--override", "holonomy.nx=512"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    for name in ["matrix_m", "matrix_w", "matrix_mg"] {
        let mut rdr = csv::Reader::from_path(dir.path().join(format!("{name}.csv"))).unwrap();
        assert_eq!(rdr.headers().unwrap(), vec!["row_k", "col_k", "re", "im"]);
        assert_eq!(rdr.records().count(), 49);
    }
}

#[test]
fn spectrum_table_and_degeneracy_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectrum", "--override", "window=[0,1]"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["phi", "k", "energy", "velocity", "current", "anholonomy_residual", "degenerate"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 10);
    for row in &rows {
        assert_eq!(row[5].parse::<f64>().unwrap(), 0.0);
        let half = row[0].parse::<f64>().unwrap() == 0.5;
        assert_eq!(&row[6] == "true", half);
    }
    let half: Vec<_> = rows.iter().filter(|r| &r[0] == "0.5").collect();
    assert_eq!(half[0][2], half[1][2]);
}

#[test]
fn null_path_keeps_the_label() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["cycle", "--override", "schedule.phi_end=0.0", "--override", "schedule.duration=1.0", "--override", "state.k=2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(dir.path())["summary"]["winner_index"], 2);
}

#[test]
fn half_cycle_audit_gives_half_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["phase-audit", "--override", "schedule.phi_end=0.5", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    let q = r["summary"]["quadrature_extra_phase"].as_f64().unwrap();
    assert!((q - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    assert!(r["series"]["phase_audit"].is_array());
    assert!(!dir.path().join("phase_audit.csv").exists());
}

#[test]
fn null_path_w_errors_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["w-convergence", "--override", "schedule.phi_end=0.0", "--format", "csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("report.json").exists());
    let mut rdr = csv::Reader::from_path(dir.path().join("w_convergence.csv")).unwrap();
    for row in rdr.records() {
        assert_eq!(row.unwrap()[1].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn failed_assertions_exit_with_two_and_still_write() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["w-convergence", "--override", "w_convergence.tolerance=1e-9"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    assert_eq!(r["passed"], false);
    assert!(dir.path().join("w_convergence.csv").exists());
}

#[test]
fn execution_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = run(&["spectrum", "--override", "ring.radius=2"], dir.path());
    assert_eq!(bad_key.status.code(), Some(1));
    let small = run(&["holonomy", "--override", "window=[0,3]"], dir.path());
    assert_eq!(small.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&small.stderr).contains("at least 5"));
    let missing = run(&["cycle", "--config", "/nonexistent/scenario.toml"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    let fractional = run(&["cycle", "--override", "schedule.phi_end=0.5"], dir.path());
    assert_eq!(fractional.status.code(), Some(1));
}

#[test]
fn config_pinned_to_another_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectrum", "--override", "experiment=cycle"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["propagate", "--override", "schedule.duration=1.0", "--override", "solver.nx=64"];
    assert_eq!(run(&args, a.path()).status.code(), Some(0));
    assert_eq!(run(&args, b.path()).status.code(), Some(0));
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(a.path(), "propagation.csv"), read(b.path(), "propagation.csv"));
    let strip = |d: &Path| {
        let mut r = report(d);
        r["config"]["output"]["dir"] = Value::Null;
        r
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn periodic_gauge_propagation_tracks_plane_waves() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["propagate", "--override", "solver.gauge=periodic", "--override", "propagate.track=[1, 0]"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("propagation.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["t", "phi", "norm", "re_1", "im_1", "re_0", "im_0"]);
    let last = rdr.records().last().unwrap().unwrap();
    let (re, im): (f64, f64) = (last[3].parse().unwrap(), last[4].parse().unwrap());
    assert!(re.hypot(im) >= 0.999);
}
