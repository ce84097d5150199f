use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn meosim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meosim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_graph(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

struct Fixture {
    dir: TempDir,
    triangle: PathBuf,
    path3: PathBuf,
    path5: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let triangle = write_graph(dir.path(), "triangle.txt", "n 3\n0 1\n1 2\n0 2\n");
    let path3 = write_graph(dir.path(), "path3.json", r#"{"n": 3, "edges": [[0, 1], [1, 2]]}"#);
    let path5 = write_graph(dir.path(), "path5.txt", "n 5\n0 1\n1 2\n2 3\n3 4\n");
    Fixture { dir, triangle, path3, path5 }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn meo_triangle_vs_path() {
    let f = fixture();
    let out = meosim(&["meo", s(&f.triangle), s(&f.path3)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["meo"], 2);
    assert!((v["similarity"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);

    let same = meosim(&["meo", s(&f.path5), s(&f.path5)]);
    let v: Value = serde_json::from_str(stdout(&same).trim()).unwrap();
    assert_eq!(v["similarity"], 1.0);
}

#[test]
fn mismatched_sizes_exit_2() {
    let f = fixture();
    let out = meosim(&["meo", s(&f.triangle), s(&f.path5)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn run_reports_and_summary() {
    let f = fixture();
    let args = ["run", s(&f.path5), s(&f.path5), "--trials", "100", "--seed", "4"];
    let out = meosim(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(lines[0]["omega"], 17);
    let summary = &lines[100]["summary"];
    assert!(summary["success_rate"].as_f64().unwrap() >= 0.5);
    assert_eq!(summary["meo"], 4);

    let again = meosim(&args);
    assert_eq!(again.stdout, out.stdout, "same seed, same bytes");
    let parallel = meosim(&["--jobs", "3", "run", s(&f.path5), s(&f.path5), "--trials", "100", "--seed", "4"]);
    assert_eq!(parallel.stdout, out.stdout, "thread count does not change output");
}

#[test]
fn run_rejects_small_n_without_flag() {
    let f = fixture();
    assert_eq!(meosim(&["run", s(&f.triangle), s(&f.path3)]).status.code(), Some(2));
    let ok = meosim(&["run", s(&f.triangle), s(&f.path3), "--allow-small", "--trials", "5"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn verify_suites() {
    let f = fixture();
    let eps = meosim(&["verify", "--suite", "epsilon", "--n", "5"]);
    assert_eq!(eps.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&eps)).unwrap();
    assert!((v["epsilon"].as_f64().unwrap() - 0.00907762).abs() < 1e-6);

    let report = f.dir.path().join("circuit.json");
    let circuit = meosim(&["verify", "--suite", "circuit", "--n", "3", "--out", s(&report)]);
    assert_eq!(circuit.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);

    assert_eq!(meosim(&["verify", "--suite", "zoomok", "--n", "9"]).status.code(), Some(2));
    assert_eq!(meosim(&["verify", "--suite", "nope", "--n", "5"]).status.code(), Some(2));
}

#[test]
fn figure_outputs() {
    let f = fixture();
    let csv = f.dir.path().join("alldat.csv");
    let out = meosim(&["figure", "--name", "alldat", "--n", "4", "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 25);

    let en = meosim(&["figure", "--name", "en", "--n", "5..8"]);
    let text = stdout(&en);
    let eps: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(eps.len(), 4);
    assert!(eps.windows(2).all(|w| w[1] < w[0]));

    let hist = meosim(&["figure", "--name", "evsbij", "--graphs", s(&f.triangle), s(&f.triangle)]);
    assert_eq!(hist.status.code(), Some(0));
    assert_eq!(stdout(&hist).lines().count(), 2, "one bucket: every map keeps all 3 edges");

    assert_eq!(meosim(&["figure", "--name", "bogus"]).status.code(), Some(2));
}

#[test]
fn simulate_dump_is_stable() {
    let f = fixture();
    // Every map of the path into the triangle keeps both edges, so E = 1
    // marks all six codes and E = 2 marks none.
    for (e, anc, m) in [("1", 1, 6), ("2", 0, 0)] {
        let out = meosim(&["simulate", s(&f.triangle), s(&f.path3), "--threshold", e, "--backend", "dense", "--dump"]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        let mut lines = text.lines();
        let summary: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(summary["m_marked"], m);
        let amp = 1.0 / 6f64.sqrt();
        let golden: Vec<String> = ["000", "001", "002", "010", "011", "012"]
            .iter()
            .map(|c| format!("reg1={c} reg2=1,2,3 reg3=0 anc={anc} amp={amp:.12},0.000000000000"))
            .collect();
        assert_eq!(lines.map(String::from).collect::<Vec<_>>(), golden);
    }
}
