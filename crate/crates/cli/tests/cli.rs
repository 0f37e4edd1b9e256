use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn snkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snkit"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn snkit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a printed table.
fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

#[test]
fn solve_writes_a_report_matching_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = snkit(dir.path(), &["solve", "inf1g"]);
    assert_eq!(o.status.code(), Some(0));
    let row = &rows(&o)[0];
    let k: f64 = row[6].parse().unwrap();
    assert!((k - 1.2).abs() < 1e-6, "{k}");

    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("inf1g.power.json")).unwrap()).unwrap();
    assert_eq!(json["problem"], "inf1g");
    assert_eq!(format!("{:.12}", json["k"].as_f64().unwrap()), row[6]);
    assert_eq!(json["outer_iterations"].as_u64().unwrap().to_string(), row[4]);
    assert_eq!(json["converged"], true);
}

#[test]
fn compare_runs_each_solver() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("all.json");
    let o = snkit(dir.path(), &["compare", "inf2g", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&o);
    let solvers: Vec<_> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(solvers, ["power", "rqi", "arnoldi"]);
    for r in &rows {
        let k: f64 = r[6].parse().unwrap();
        assert!((k - 10.0 / 9.0).abs() < 1e-5, "{r:?}");
    }
    let json: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 3);
}

#[test]
fn preconditioned_rqi_needs_few_outers_on_dr95() {
    let dir = tempfile::tempdir().unwrap();
    let o = snkit(dir.path(), &["compare", "dr95", "--solvers", "power,rqi", "--precond"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&o);
    let outers: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(outers[1] <= 0.2 * outers[0], "{outers:?}");
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(snkit(dir.path(), &["solve", "no_such_problem"]).status.code(), Some(1));
    assert_eq!(snkit(dir.path(), &["solve", "inf1g", "--bogus"]).status.code(), Some(1));
    assert_eq!(snkit(dir.path(), &["solve", "inf1g", "--solver", "rqi", "--mg", "gs"]).status.code(), Some(1));
    std::fs::write(dir.path().join("bad.prob"), "dimension 3\n").unwrap();
    assert_eq!(snkit(dir.path(), &["solve", "bad.prob"]).status.code(), Some(1));
}

#[test]
fn non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = snkit(dir.path(), &["solve", "dr95", "--max-outer", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("not converged"));
}

#[test]
fn oracle_prints_the_dense_pair() {
    let dir = tempfile::tempdir().unwrap();
    let o = snkit(dir.path(), &["oracle", "inf2g"]);
    assert_eq!(o.status.code(), Some(0));
    let json: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let n = json["dimension"].as_u64().unwrap() as usize;
    assert!((json["k"].as_f64().unwrap() - 10.0 / 9.0).abs() < 1e-10);
    assert_eq!(json["flux"].as_array().unwrap().len(), n);
    assert_eq!(json["loss"].as_array().unwrap().len(), n);
}

#[test]
fn bench_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = snkit(dir.path(), &["bench"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(snkit_core::harness::CSV_HEADER));
    let body: Vec<_> = lines.collect();
    assert_eq!(body.len(), 4 * snkit_core::harness::BUILTIN_NAMES.len());
    assert!(body.iter().all(|l| l.split(',').count() == 8));
}
