use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dilatrix_cli::files::{MatrixFile, TripleFile, TupleFile};
use dilatrix_cli::report::ReportFile;
use serde_json::json;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dilatrix"))
}

fn write(dir: &Path, name: &str, value: serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, value.to_string()).unwrap();
    path
}

fn scalar(re: f64, im: f64) -> serde_json::Value {
    json!({"rows": 1, "cols": 1, "data": [[re, im]]})
}

fn scalar_pair(dir: &Path, a: f64, b: f64) -> PathBuf {
    write(dir, "tuple.json", json!({"dim": 1, "matrices": [scalar(a, 0.0), scalar(b, 0.0)]}))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_report(out: &Output) -> ReportFile {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_accepts_member_and_rejects_non_member() {
    let dir = tempfile::tempdir().unwrap();
    let good = scalar_pair(dir.path(), 0.0, 1.0);
    let out = run(&["check", path(&good), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_report(&out);
    assert!(report.pass);
    assert_eq!(report.inputs_digest.len(), 64);

    let bad = scalar_pair(dir.path(), 0.5, 0.5);
    let out = run(&["check", path(&bad), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!json_report(&out).pass);
}

#[test]
fn malformed_input_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{\"dim\": 1, \"matrices\": [").unwrap();
    assert_eq!(run(&["check", path(&p)]).status.code(), Some(2));
    let wrong = write(dir.path(), "wrong.json", json!({"dim": 2, "matrices": [scalar(0.0, 0.0)]}));
    assert_eq!(run(&["check", path(&wrong)]).status.code(), Some(2));
    let nan = dir.path().join("nan.json");
    std::fs::write(&nan, r#"{"rows":1,"cols":1,"data":[[1e999,0]]}"#).unwrap();
    let t = scalar_pair(dir.path(), 0.5, 1.0);
    assert_eq!(run(&["lift", path(&t), path(&nan)]).status.code(), Some(2));
    assert_eq!(run(&["check", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["check", path(&t), "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn dilate_writes_triple_and_dilation_map() {
    let dir = tempfile::tempdir().unwrap();
    let t = scalar_pair(dir.path(), 0.5, 1.0);
    let out_dir = dir.path().join("out");
    let out = run(&["dilate", path(&t), "--out", path(&out_dir), "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json_report(&out);
    assert!(report.residuals.values().all(|v| *v <= 1e-6));
    let triple: TripleFile = serde_json::from_str(&std::fs::read_to_string(out_dir.join("triple.json")).unwrap()).unwrap();
    assert_eq!(triple.dim_e, 1);
    assert!(out_dir.join("pi.json").exists());
    let saved: ReportFile = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, report);
}

#[test]
fn dilate_reports_mathematical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = scalar_pair(dir.path(), 0.5, 0.5);
    let out = run(&["dilate", path(&bad), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json_report(&out).error.unwrap().contains("not in the class"));

    let t = scalar_pair(dir.path(), 0.5, 1.0);
    let out = run(&["dilate", path(&t), "--degree", "3", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = json_report(&out).error.unwrap();
    assert!(err.contains("truncation degree 3"), "{err}");
    assert!(err.contains("1.25e-1"), "{err}");
}

#[test]
fn vn_examples() {
    let dir = tempfile::tempdir().unwrap();
    let t = scalar_pair(dir.path(), 0.5, 1.0);
    let z1 = write(dir.path(), "z1.json", json!({"coeffs": {"1,0": [1.0, 0.0]}}));
    let out = run(&["vn", path(&t), path(&z1), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_report(&out);
    assert!((r.info["lhs"] - 0.5).abs() < 1e-12);
    assert!((r.info["rhs"] - 1.0).abs() < 1e-12);
    assert_eq!(r.parameters.grid, Some(257));

    let one = write(dir.path(), "one.json", json!({"coeffs": {"0,0": [1.0, 0.0]}}));
    let r = json_report(&run(&["vn", path(&t), path(&one), "--json"]));
    assert!((r.info["lhs"] - 1.0).abs() < 1e-12 && (r.info["rhs"] - 1.0).abs() < 1e-12);

    assert_eq!(run(&["vn", path(&t), path(&one), "--grid", "0"]).status.code(), Some(2));
    let arity = write(dir.path(), "bad.json", json!({"coeffs": {"1": [1.0, 0.0]}}));
    assert_eq!(run(&["vn", path(&t), path(&arity)]).status.code(), Some(2));
    let high = write(dir.path(), "high.json", json!({"coeffs": {"17,0": [1.0, 0.0]}}));
    assert_eq!(run(&["vn", path(&t), path(&high)]).status.code(), Some(2));
}

#[test]
fn lift_examples() {
    let dir = tempfile::tempdir().unwrap();
    let t = scalar_pair(dir.path(), 0.5, 1.0);
    let x = write(dir.path(), "x.json", scalar(1.0 / 3.0, 0.0));
    let out = run(&["lift", path(&t), path(&x), "--tol", "1e-6", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let id = write(dir.path(), "id.json", scalar(1.0, 0.0));
    let out_dir = dir.path().join("lift");
    let out = run(&["lift", path(&t), path(&id), "--out", path(&out_dir)]);
    assert_eq!(out.status.code(), Some(0));
    let c0: MatrixFile = serde_json::from_str(&std::fs::read_to_string(out_dir.join("theta/theta_000.json")).unwrap()).unwrap();
    assert_eq!(c0.rows, 1);
    assert!((c0.data[0][0] - 1.0).abs() < 1e-12 && c0.data[0][1].abs() < 1e-12);
    assert!(!out_dir.join("theta/theta_001.json").exists());

    // A 2x2 tuple and an X outside its commutant.
    let t2 = write(
        dir.path(),
        "t2.json",
        json!({"dim": 2, "matrices": [
            {"rows": 2, "cols": 2, "data": [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]},
            {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]}
        ]}),
    );
    let nx = write(
        dir.path(),
        "nx.json",
        json!({"rows": 2, "cols": 2, "data": [[0.0, 0.0], [0.5, 0.0], [0.0, 0.0], [0.0, 0.0]]}),
    );
    let out = run(&["check", path(&t2)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = run(&["lift", path(&t2), path(&nx), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json_report(&out).error.unwrap().contains("not in the commutant"));
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = run(&["gen", "--kind", "direct_sum", "--seed", "7", "--dims", "2,2", "--out", path(d)]);
        assert_eq!(out.status.code(), Some(0));
    }
    let ta = std::fs::read(a.join("tuple.json")).unwrap();
    assert_eq!(ta, std::fs::read(b.join("tuple.json")).unwrap());
    let tuple: TupleFile = serde_json::from_slice(&ta).unwrap();
    assert_eq!(tuple.dim, 4);
    assert_eq!(run(&["check", path(&a.join("tuple.json"))]).status.code(), Some(0));

    let c = dir.path().join("c");
    let out = run(&["gen", "--kind", "bcl_compression", "--seed", "3", "--n", "3", "--dims", "2,2", "--out", path(&c)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(c.join("triple.json").exists());

    let out = run(&["gen", "--kind", "bogus", "--out", path(&c)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let t = scalar_pair(dir.path(), 0.0, 1.0);
    let out = bin().args(["check", path(&t)]).env("DILATRIX_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["check", path(&t)]).env("DILATRIX_THREADS", "1").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn digest_ignores_formatting_and_tracks_content() {
    let dir = tempfile::tempdir().unwrap();
    let t = scalar_pair(dir.path(), 0.0, 1.0);
    let pretty = dir.path().join("pretty.json");
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&t).unwrap()).unwrap();
    std::fs::write(&pretty, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    let a = json_report(&run(&["check", path(&t), "--json"]));
    let b = json_report(&run(&["check", path(&pretty), "--json"]));
    assert_eq!(a.inputs_digest, b.inputs_digest);
    let c = json_report(&run(&["check", path(&t), "--json", "--tol", "1e-6"]));
    assert_ne!(a.inputs_digest, c.inputs_digest);
}
