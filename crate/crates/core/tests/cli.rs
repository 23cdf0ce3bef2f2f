use std::path::Path;
use std::process::Command;

use obstacle_dpp::app::residual_from_csv;
use obstacle_dpp::config::{Command as Cmd, RunConfig};
use serde_json::Value;

fn run(dir: &Path, cmd: &str, sets: &[&str]) -> std::process::Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_obstacle-dpp"));
    c.arg(cmd).arg("--out").arg(dir);
    for s in sets {
        c.arg("--set").arg(s);
    }
    c.output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.retain(|k, _| !k.contains("time") && k != "runtime_s");
            m.values_mut().for_each(strip_timings);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

const SMALL: &[&str] = &["dataset=\"case_a_p10\"", "h=0.1", "collar=0.4", "radius_in_mesh_units=3"];

#[test]
fn solve_writes_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "solve", SMALL);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let r = report(dir.path());
    let nodes = r["mesh"]["nodes"].as_u64().unwrap() as usize;
    assert_eq!(nodes, 27 * 27);
    assert_eq!(csv.lines().count(), nodes + 1);
    assert_eq!(csv.lines().filter(|l| l.contains(",interior,")).count(), 19 * 19);
    assert_eq!(r["mesh"]["k"], 29);
}

#[test]
fn reports_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut sets = SMALL.to_vec();
    sets.extend(["runs=500", "probes=[[0.0, 0.0], [0.3, -0.4]]", "seed=5"]);
    for d in [&a, &b] {
        assert!(run(d.path(), "simulate", &sets).status.success());
    }
    let (mut ra, mut rb) = (report(a.path()), report(b.path()));
    strip_timings(&mut ra);
    strip_timings(&mut rb);
    assert_eq!(ra, rb);
    assert_eq!(ra["simulate"].as_array().unwrap().len(), 2);
    assert_eq!(
        std::fs::read(a.path().join("solution.csv")).unwrap(),
        std::fs::read(b.path().join("solution.csv")).unwrap()
    );
}

#[test]
fn csv_round_trip_reproduces_residual() {
    let dir = tempfile::tempdir().unwrap();
    let sets: Vec<String> = SMALL.iter().map(|s| s.to_string()).chain(["tolerance=1e-7".to_string()]).collect();
    let refs: Vec<&str> = sets.iter().map(|s| s.as_str()).collect();
    assert!(run(dir.path(), "validate", &refs).status.success());
    let r = report(dir.path());
    let solver = r["solve"]["residual"].as_f64().unwrap();
    let reread = r["validate"]["csv_residual"].as_f64().unwrap();
    assert!((solver - reread).abs() <= 1e-12);

    let config = RunConfig::from_sources(None, &sets, Some(Cmd::Solve)).unwrap();
    let again = residual_from_csv(&config, &dir.path().join("solution.csv")).unwrap();
    assert!((again - solver).abs() <= 1e-12);
}

#[test]
fn validate_admits_known_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "validate",
        &["dataset=\"harmonic_quadratic_p2\"", "h=0.1", "collar=0.35", "radius_in_mesh_units=3", "tol=1e-9"],
    );
    assert!(out.status.success());
    let r = report(dir.path());
    assert_eq!(r["validate"]["oracle"]["admitted"], true);
    assert!(r["validate"]["known_solution_error"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn bench_reports_stencil_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        "bench",
        &["h=0.1", "collar=0.35", "bench_radii=[3, 2, 1]", "bench_sweep=false"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let ks: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(ks, ["29", "13", "5"]);
    assert!(!dir.path().join("bench_p.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |cmd: &str, sets: &[&str]| run(dir.path(), cmd, sets).status.code();
    assert_eq!(code("solve", &["nonsense=1"]), Some(2));
    assert_eq!(code("solve", &["dataset=\"nope\""]), Some(2));
    assert_eq!(code("solve", &["dataset=\"try1_p2\"", "h=0.1", "radius_in_mesh_units=3"]), Some(2));
    let mut sets = SMALL.to_vec();
    sets.push("max_iterations=2");
    assert_eq!(code("solve", &sets), Some(3));
    assert_eq!(report(dir.path())["status"], "max_iterations_exceeded");

    let file = dir.path().join("file-not-dir");
    std::fs::write(&file, "").unwrap();
    let out = run(&file, "solve", SMALL);
    assert_eq!(out.status.code(), Some(4));
}
