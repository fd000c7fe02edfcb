use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cmc-sir"))
}

fn write_config(dir: &Path, name: &str, json: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const DIST1_POINT: &str = r#"{
    "degree_distribution": [[2, 1, 1.0]],
    "t_law": {"kind": "point", "t": 0.5},
    "n": 10000,
    "replicates": 100,
    "seed": 1
}"#;

#[test]
fn analyze_reports_desk_values() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.json", DIST1_POINT);
    let v = json_stdout(&run(&["analyze"], &cfg));
    assert!((v["r0"].as_f64().unwrap() - 1.3660).abs() < 1e-4);
    assert!((v["final_size"].as_f64().unwrap() - 0.8219).abs() < 1e-3);
    assert_eq!(v["subcritical"], Value::Bool(false));
    assert!(v["warnings"].is_array());

    let half = write_config(
        dir.path(),
        "b.json",
        r#"{"degree_distribution": [[2, 1, 1.0]], "t_law": {"kind": "point", "t": 0.5}, "f_v": 0.5}"#,
    );
    let v = json_stdout(&run(&["analyze"], &half));
    assert_eq!(v["subcritical"], Value::Bool(true));
    assert_eq!(v["outbreak_probability"].as_f64(), Some(0.0));
}

#[test]
fn invalid_configs_exit_with_code_2() {
    let dir = TempDir::new().unwrap();
    let bad_pmf = write_config(
        dir.path(),
        "pmf.json",
        r#"{"degree_distribution": [[2, 1, 0.9]], "t_law": {"kind": "point", "t": 0.5}}"#,
    );
    assert_eq!(run(&["analyze"], &bad_pmf).status.code(), Some(2));
    let bad_json = write_config(dir.path(), "syntax.json", "{ not json");
    assert_eq!(run(&["analyze"], &bad_json).status.code(), Some(2));
    let no_law = write_config(dir.path(), "nolaw.json", r#"{"degree_distribution": [[2, 1, 1.0]]}"#);
    assert_eq!(run(&["simulate"], &no_law).status.code(), Some(2));
    let bad_law = write_config(
        dir.path(),
        "law.json",
        r#"{"degree_distribution": [[2, 1, 1.0]], "t_law": {"kind": "beta", "alpha": -1}}"#,
    );
    assert_eq!(run(&["analyze"], &bad_law).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["analyze"], &missing).status.code(), Some(1));
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.json", DIST1_POINT);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = bin().arg("simulate").arg("--config").arg(&cfg).arg("--output").arg(out).output().unwrap();
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    for file in ["replicates.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap());
    }
    let csv = std::fs::read_to_string(a.join("replicates.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["replicate", "n", "final_size", "is_major", "generations_json"]
    );
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let gens: Vec<usize> = serde_json::from_str(&rec[4]).unwrap();
        assert_eq!(gens.iter().sum::<usize>(), rec[2].parse::<usize>().unwrap());
        rows += 1;
    }
    assert_eq!(rows, 100);
    let summary: Value = serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["replicates"].as_u64(), Some(100));
}

#[test]
fn simulate_without_transmission_has_no_outbreaks() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.json",
        r#"{"degree_distribution": [[2, 1, 1.0]], "t_law": {"kind": "point", "t": 0.0}, "n": 2000, "replicates": 20}"#,
    );
    let v = json_stdout(&run(&["simulate"], &cfg));
    assert_eq!(v["outbreak_frequency"].as_f64(), Some(0.0));
}

#[test]
fn sweep_columns_and_monotonicity() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        r#"{"degree_distribution": [[2, 1, 1.0]], "replicates": 0, "sweep": {"alpha_grid": [16, 0.25, 4, 1]}}"#,
    );
    let out = run(&["sweep"], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap().len(), 7);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let alphas: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(alphas, [0.25, 1.0, 4.0, 16.0]);
    let e_t2: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    for (got, want) in e_t2.iter().zip([5.0 / 12.0, 1.0 / 3.0, 5.0 / 18.0, 17.0 / 66.0]) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    let r0: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(r0.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{r0:?}");
}

#[test]
fn empty_sweep_grid_gives_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "empty.json",
        r#"{"degree_distribution": [[2, 1, 1.0]], "replicates": 0, "sweep": {"alpha_grid": []}}"#,
    );
    let out = run(&["sweep"], &cfg);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "distribution,alpha,e_t2,r0,extinction_probability,final_size,critical_coverage\n"
    );
}

#[test]
fn sweep_with_simulation_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "mc.json",
        r#"{"degree_distribution": [[2, 1, 1.0]], "n": 2000, "replicates": 5,
            "sweep": {"alpha_grid": [1.0], "distributions": [{"name": "d1", "degree_distribution": [[2, 1, 1.0]]}]}}"#,
    );
    let out = run(&["sweep"], &cfg);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().ends_with("mc_mean_final_fraction_major_se"));
    assert!(lines.next().unwrap().starts_with("d1,1.0,"));
}

#[test]
fn graph_stats_clustering() {
    let dir = TempDir::new().unwrap();
    let tri = write_config(dir.path(), "tri.json", r#"{"degree_distribution": [[0, 1, 1.0]], "n": 3}"#);
    let edges = dir.path().join("edges.txt");
    let out = bin().arg("graph-stats").arg("--config").arg(&tri).arg("--edge-list").arg(&edges).output().unwrap();
    let v = json_stdout(&out);
    assert_eq!(v["empirical_clustering"].as_f64(), Some(1.0));
    assert_eq!(std::fs::read_to_string(&edges).unwrap().lines().count(), 3);

    let d3 = write_config(
        dir.path(),
        "d3.json",
        r#"{"degree_distribution": [[0, 2, 0.95], [2, 1, 0.05]], "seed": 4}"#,
    );
    let v = json_stdout(&run(&["graph-stats", "--n", "20000"], &d3));
    assert!((v["asymptotic_clustering"].as_f64().unwrap() - 0.325).abs() < 1e-12);
    assert!((v["empirical_clustering"].as_f64().unwrap() - 0.325).abs() < 0.02);
    assert_eq!(v["n"].as_u64(), Some(20000));
}
