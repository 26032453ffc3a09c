//! End-to-end runs of the `bse-doubling` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bse-doubling"));
    c.env_remove("BSE_DOUBLING_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn bse-doubling")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Problem {
    dir: TempDir,
    a: PathBuf,
    b: PathBuf,
}

impl Problem {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn generated(extra: &[&str]) -> Problem {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.mtx"), dir.path().join("b.mtx"));
    let mut args = vec!["generate", "--out-a", p(&a), "--out-b", p(&b)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    Problem { dir, a, b }
}

fn solve(prob: &Problem, out: &str, extra: &[&str]) -> (Output, Option<Value>) {
    let out = prob.path(out);
    let mut args = vec!["solve", "--input-a", p(&prob.a), "--input-b", p(&prob.b), "--output", p(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    let json = std::fs::read_to_string(&out).ok().map(|s| serde_json::from_str(&s).unwrap());
    (o, json)
}

fn eigenvalues(v: &Value) -> Vec<(f64, f64)> {
    v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| (z["re"].as_f64().unwrap(), z["im"].as_f64().unwrap()))
        .collect()
}

#[test]
fn generate_is_deterministic() {
    let x = generated(&["--kind", "random-complex", "--n", "5", "--seed", "3", "--gap", "2"]);
    let y = generated(&["--kind", "random-complex", "--n", "5", "--seed", "3", "--gap", "2"]);
    let z = generated(&["--kind", "random-complex", "--n", "5", "--seed", "4", "--gap", "2"]);
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&x.a), read(&y.a));
    assert_eq!(read(&x.b), read(&y.b));
    assert_ne!(read(&x.a), read(&z.a));
    let text = String::from_utf8(read(&x.a)).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix array complex general"));
}

#[test]
fn generate_validates_n() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.mtx"), dir.path().join("b.mtx"));
    let base = ["generate", "--out-a", p(&a), "--out-b", p(&b)];

    let o = run(&[&base[..], &["--kind", "random-real", "--n", "0"]].concat());
    assert_eq!(code(&o), 1);
    let o = run(&[&base[..], &["--kind", "random-real"]].concat());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--n"));

    let o = run(&[&base[..], &["--kind", "defective-fixture", "--n", "9"]].concat());
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("ignored"));
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.lines().any(|l| l.trim() == "7 7"));
}

#[test]
fn solve_defective_fixture() {
    let prob = generated(&["--kind", "defective-fixture"]);
    let (o, json) = solve(&prob, "out.json", &["--vectors"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json.unwrap();
    assert_eq!(v["n"], 7);
    assert_eq!(v["converged"], true);
    let eigs = eigenvalues(&v);
    assert_eq!(eigs.len(), 14);
    // The second half is the exact mirror −λ̄ of the first.
    for j in 0..7 {
        let (re, im) = eigs[j];
        assert_eq!(eigs[j + 7], (-re, im));
        assert!(re < 0.0 || (re == 0.0 && im == 0.0));
    }
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["eigenvectors"].as_array().unwrap().len(), 14);
    assert_eq!(v["manifest"]["command"], "solve");
    assert!(v["manifest"]["timing"]["solve_ms"].is_number());
}

#[test]
fn solve_output_is_reproducible() {
    let prob = generated(&["--kind", "random-complex", "--n", "12", "--seed", "8", "--gap", "14"]);
    let (o1, j1) = solve(&prob, "out.json", &[]);
    let (o2, j2) = solve(&prob, "out.json", &[]);
    assert_eq!((code(&o1), code(&o2)), (0, 0));
    let (mut j1, mut j2) = (j1.unwrap(), j2.unwrap());
    for j in [&mut j1, &mut j2] {
        j["manifest"].as_object_mut().unwrap().remove("timing");
    }
    assert_eq!(j1, j2);
    assert_eq!(j1["regime"], "quadratic");
}

#[test]
fn breakdown_fixture_with_unit_shift_does_not_converge() {
    let prob = generated(&["--kind", "breakdown-fixture"]);
    let (o, json) = solve(&prob, "out.json", &["--alpha", "1"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("not converged"));
    let v = json.expect("partial output is still written");
    assert_eq!(v["converged"], false);
    assert_eq!(v["iterations"], 60);
    assert_eq!(v["alpha"], 1.0);
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.mtx");
    let out = dir.path().join("out.json");
    let o = run(&["solve", "--input-a", p(&missing), "--input-b", p(&missing), "--output", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("nowhere.mtx"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["solve"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    let prob = generated(&["--kind", "random-real", "--n", "3"]);
    let (o, _) = solve(&prob, "out.json", &["--alpha", "abc"]);
    assert_eq!(code(&o), 1);
    let (o, _) = solve(&prob, "out.json", &["--remedy", "sometimes"]);
    assert_eq!(code(&o), 1);
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("solve"));
}

#[test]
fn compare_reports_each_method() {
    let prob = generated(&["--kind", "random-complex", "--n", "8", "--seed", "2", "--gap", "11"]);
    let out = prob.path("cmp.json");
    let o = run(&[
        "compare", "--input-a", p(&prob.a), "--input-b", p(&prob.b), "--trials", "3", "--output", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["trials"], 3);
    let alphas = v["alphas"].as_array().unwrap();
    assert_eq!(alphas.len(), 3);
    for m in ["da", "direct", "pencil"] {
        assert!(v["methods"][m]["prec"].as_f64().unwrap() < -9.0, "{m}: {}", v["methods"][m]);
        assert!(v["manifest"]["timing"][format!("{m}.eTime_ms")].is_number());
    }
    assert_eq!(v["methods"]["da"]["converged_trials"], 3);

    let o = run(&["compare", "--input-a", p(&prob.a), "--input-b", p(&prob.b), "--trials", "0"]);
    assert_eq!(code(&o), 1);
    let o = run(&["compare", "--input-a", p(&prob.a), "--input-b", p(&prob.b), "--methods", "qr"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bench_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let o = run(&["bench", "--sizes", "4,8", "--trials", "2", "--output", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["n"], 8);
    assert_eq!(rows[1]["converged_trials"], 2);
    assert!(rows[1]["residual_worst"].as_f64().unwrap() < 1e-10);
    assert!(v["manifest"]["timing"]["n8.da_ms"].is_number());
    assert_eq!(code(&run(&["bench", "--sizes", "4,x"])), 1);
}

#[test]
fn spectrum_from_solve_output() {
    let prob = generated(&["--kind", "random-complex", "--n", "6", "--seed", "1", "--gap", "10"]);
    let (o, json) = solve(&prob, "eigs.json", &["--vectors"]);
    assert_eq!(code(&o), 0);
    let eigs = prob.path("eigs.json");

    let csv = prob.path("dos.csv");
    let o = run(&["spectrum", "--eigs", p(&eigs), "--output", p(&csv)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,value"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (w, v) = l.split_once(',').unwrap();
            (w.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2001);
    let integral: f64 = rows.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    assert!((integral - 1.0).abs() < 1e-3, "integral {integral}");

    let o = run(&["spectrum", "--eigs", p(&eigs), "--grid", "0:0.5:2", "--broadening", "0.1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 6);
    assert_eq!(code(&run(&["spectrum", "--eigs", p(&eigs), "--grid", "2:0.5:0"])), 1);

    let o = run(&["spectrum", "--eigs", p(&eigs), "--kind", "absorption"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).to_lowercase().contains("dipole"), "{}", stderr(&o));

    // Absorption with unit dipoles on every component.
    let dim = 2 * json.unwrap()["n"].as_u64().unwrap() as usize;
    let mut mtx = format!("%%MatrixMarket matrix array complex general\n{dim} 2\n");
    for _ in 0..2 * dim {
        mtx.push_str("1 0\n");
    }
    let dip = prob.path("dipoles.mtx");
    std::fs::write(&dip, mtx).unwrap();
    let o = run(&["spectrum", "--eigs", p(&eigs), "--kind", "absorption", "--dipoles", p(&dip)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().skip(1).all(|l| l.split_once(',').unwrap().1.parse::<f64>().unwrap().is_finite()));
}

#[test]
fn threads_env_is_validated() {
    let prob = generated(&["--kind", "random-real", "--n", "4", "--gap", "4"]);
    let out = prob.path("t.json");
    let args = ["solve", "--input-a", p(&prob.a), "--input-b", p(&prob.b), "--output", p(&out)];
    let o = bin().args(args).env("BSE_DOUBLING_THREADS", "two").output().unwrap();
    assert_eq!(code(&o), 1);
    let o = bin().args(args).env("BSE_DOUBLING_THREADS", "2").output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["manifest"]["threads"], 2);
}
