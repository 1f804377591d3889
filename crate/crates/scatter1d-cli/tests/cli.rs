use scatter1d::exact_solvers::barrier_matrix;
use scatter1d::C64;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scatter1d"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("SCATTER1D_THREADS").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn cplx(v: &Value) -> C64 {
    C64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

fn write_spec(dir: &Path, name: &str, potential: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, format!(r#"{{"schema":"scatter1d/v1","potential":{potential}}}"#)).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_delta() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "d.json", r#"{"type":"delta","strength":[2.0,0.0],"location":0.0}"#);
    let out = run(&["solve", "--spec", s(&spec), "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "scatter1d/v1");
    assert!((cplx(&v["R_l"]) - C64::new(-0.5, -0.5)).norm() < 1e-15);
    assert!((cplx(&v["R_r"]) - C64::new(-0.5, -0.5)).norm() < 1e-15);
    assert!((cplx(&v["T"]) - C64::new(0.5, -0.5)).norm() < 1e-15);
}

#[test]
fn solve_empty_sum_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "z.json", r#"{"type":"sum","terms":[]}"#);
    let v = json(&run(&["solve", "--spec", s(&spec), "--k", "2.5"]));
    assert_eq!(cplx(&v["M"]["M11"]), C64::new(1.0, 0.0));
    assert_eq!(cplx(&v["M"]["M12"]), C64::new(0.0, 0.0));
    assert_eq!(cplx(&v["R_l"]), C64::new(0.0, 0.0));
    assert_eq!(cplx(&v["T"]), C64::new(1.0, 0.0));
}

#[test]
fn solve_at_spectral_singularity_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "ss.json", r#"{"type":"delta","strength":[0.0,2.0],"location":0.0}"#);
    let out = run(&["solve", "--spec", s(&spec), "--k", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let v = json(&out);
    assert!(v["classification"].as_array().unwrap().iter().any(|c| c == "spectral_singularity"));
    assert!(v["T"].is_null());
    assert_eq!(cplx(&v["M"]["M22"]), C64::new(0.0, 0.0));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&["solve", "--spec", s(&bad), "--k", "1"]).status.code(), Some(2));
    let unknown = write_spec(dir.path(), "u.json", r#"{"type":"delta","strength":[1,0],"location":0,"extra":1}"#);
    assert_eq!(run(&["solve", "--spec", s(&unknown), "--k", "1"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--spec", s(&bad), "--k", "-1"]).status.code(), Some(2));
    let ok = write_spec(dir.path(), "d.json", r#"{"type":"delta","strength":[1,0],"location":0}"#);
    let out = run(&["verify", "--spec", s(&ok), "--k0", "1", "--r-left", "1;0", "--r-right", "0,0", "--t", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
}

/// Height of a unit-width barrier with a spectral singularity at `k = 1`, by Newton iteration on `M22`.
fn singular_barrier_height() -> C64 {
    let m22 = |z: C64| barrier_matrix(z, 0.0, 1.0, 1.0).unwrap().m22();
    let mut z = C64::new(0.0, 2.0);
    for _ in 0..50 {
        let h = 1e-7;
        let d = (m22(z + h) - m22(z - h)) / (2.0 * h);
        z -= m22(z) / d;
    }
    assert!(m22(z).norm() < 1e-12);
    z
}

#[test]
fn scan_finds_barrier_singularity() {
    let dir = tempfile::tempdir().unwrap();
    let z = singular_barrier_height();
    let spec = write_spec(
        dir.path(),
        "b.json",
        &format!(r#"{{"type":"barrier","height":[{:e},{:e}],"a_minus":0.0,"a_plus":1.0}}"#, z.re, z.im),
    );
    let csv = dir.path().join("scan.csv");
    let out = run(&["scan", "--spec", s(&spec), "--k-min", "0.6", "--k-max", "1.5", "--points", "200", "--csv", s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ss: Vec<&Value> = v["singular_points"].as_array().unwrap().iter().filter(|p| p["entry"] == "M22").collect();
    assert_eq!(ss.len(), 1);
    assert!((ss[0]["k"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("k,re_M11,im_M11"));
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn scan_real_barrier_is_unitary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "r.json", r#"{"type":"barrier","height":[2.0,0.0],"a_minus":0.0,"a_plus":1.5}"#);
    let sum = dir.path().join("sum.json");
    let out = run(&["scan", "--spec", s(&spec), "--k-min", "0.2", "--k-max", "4", "--points", "300", "--csv", s(&dir.path().join("x.csv")), "-o", s(&sum)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&sum).unwrap()).unwrap();
    assert!(!v["singular_points"].as_array().unwrap().iter().any(|p| p["entry"] == "M22"));
    assert!(v["max_unitarity_violation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn scan_zero_potential_rows_are_identity() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "z.json", r#"{"type":"sum","terms":[]}"#);
    let out = run(&["scan", "--spec", s(&spec), "--k-min", "0.5", "--k-max", "2", "--points", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv_rows(&text);
    let header = rows.remove(0);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), 10);
    for r in rows {
        for (name, want) in [("re_M11", 1.0), ("im_M11", 0.0), ("re_M12", 0.0), ("re_M22", 1.0), ("im_M21", 0.0)] {
            assert_eq!(r[col(name)].parse::<f64>().unwrap(), want);
        }
    }
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn design_trivial_spec_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out_spec = dir.path().join("p.json");
    let out = run(&["design", "--k0", "1", "--r-left", "0,0", "--r-right", "0,0", "--t", "1,0", "--out-spec", s(&out_spec)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["design"]["blocks"].as_array().unwrap().is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out_spec).unwrap()).unwrap();
    assert_eq!(doc["potential"]["type"], "sum");
}

#[test]
fn design_amplifier_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out_spec = dir.path().join("p.json");
    let profile = dir.path().join("p.csv");
    let targets = ["--k0", "1", "--r-left", "1.7320508075688772@-45", "--r-right", "0,0", "--t", "0,1.4142135623730951"];
    let mut args = vec!["design"];
    args.extend(targets);
    args.extend(["--out-spec", s(&out_spec), "--out-profile", s(&profile), "--profile-points", "100"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["design"]["factorization"]["case"], 2);
    assert!(v["design"]["matrix_residual"].as_f64().unwrap() < 1e-5);
    assert_eq!(std::fs::read_to_string(&profile).unwrap().lines().count(), 101);

    let mut args = vec!["verify", "--spec", s(&out_spec)];
    args.extend(targets);
    args.extend(["--verify-tol", "1e-5"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["max_residual"].as_f64().unwrap() < 1e-5);

    // A different target fails verification.
    let out = run(&["verify", "--spec", s(&out_spec), "--k0", "1", "--r-left", "0,0", "--r-right", "0,0", "--t", "1,0"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn design_rejects_zero_transmission() {
    let out = run(&["design", "--k0", "1", "--r-left", "0.3,0", "--r-right", "-1,2", "--t", "0,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero transmission unrealizable"));
}

#[test]
fn approx_reports_three_methods() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "d.json", r#"{"type":"delta","strength":[0.5,0.1],"location":0.2}"#);
    let v = json(&run(&["approx", "--spec", s(&spec), "--k", "2"]));
    let a = v["approximations"].as_array().unwrap();
    let methods: Vec<&str> = a.iter().map(|e| e["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["born", "dyson1", "dyson2"]);
    // Both Dyson truncations are exact for a single delta.
    assert!(a[1]["error"].as_f64().unwrap() < 1e-14);
    assert!(a[2]["error"].as_f64().unwrap() < 1e-14);
    assert!(a[0]["error"].as_f64().unwrap() > 1e-4);
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "g.json",
        r#"{"type":"sum","terms":[{"type":"barrier","height":[0.3,0.4],"a_minus":0.0,"a_plus":1.0},{"type":"exp_grating","strength":[0.1,0.0],"harmonic":1,"length":2.0,"offset":1.5}]}"#,
    );
    let args = ["scan", "--spec", s(&spec), "--k-min", "0.5", "--k-max", "2", "--points", "64"];
    let a = run(&args).stdout;
    let b = bin().args(args).env("SCATTER1D_THREADS", "1").output().unwrap();
    let c = bin().args(args).arg("--threads").arg("3").output().unwrap();
    assert!(b.status.success() && c.status.success());
    assert_eq!(a, b.stdout);
    assert_eq!(a, c.stdout);
    let solve = ["solve", "--spec", s(&spec), "--k", "1.3", "--solver", "dynamical"];
    assert_eq!(run(&solve).stdout, run(&solve).stdout);
}
