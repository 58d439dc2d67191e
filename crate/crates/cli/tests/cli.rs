//! End-to-end tests of the bridge-sim binary: each test drives the compiled
//! executable the way a user would.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bridge-sim"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn bridge-sim");
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn minimal_config() -> serde_json::Value {
    serde_json::json!({
        "schema_version": 1,
        "graph": { "type": "complete", "nodes": 4 },
        "b": 0,
        "objective": { "family": "least-squares", "reg": 0.05 },
        "dataset": {
            "type": "synthetic-least-squares",
            "nodes": 4,
            "per_node": 20,
            "dim": 3,
            "noise_sd": 0.01
        },
        "rule": "dgd",
        "rounds": 50,
        "seed": 3
    })
}

fn write_config(dir: &Path, value: &serde_json::Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_trace_and_summary_echoing_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &minimal_config());
    let out_dir = dir.path().join("out");
    run_ok(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("round,consensus_diameter"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["seed"], 3);
    assert_eq!(summary["rounds"], 50);
}

#[test]
fn insufficient_neighbors_is_a_config_error_naming_the_node() {
    let dir = tempfile::tempdir().unwrap();
    let mut value = minimal_config();
    value["rule"] = "bridge".into();
    value["b"] = 2.into(); // degree 3 in K4 < 2b+1 = 5
    let cfg = write_config(dir.path(), &value);
    let out = bin()
        .args(["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("machine-readable stderr");
    assert!(err["error"].as_str().unwrap().contains("node 0"), "{err}");
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn bad_dataset_path_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut value = minimal_config();
    value["dataset"] = serde_json::json!({ "type": "csv", "path": "/nonexistent/data.csv" });
    let cfg = write_config(dir.path(), &value);
    let out = bin()
        .args(["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_ne!(out.status.code(), Some(0));
    assert!(serde_json::from_slice::<serde_json::Value>(&out.stderr).is_ok());
}

#[test]
fn override_seed_twice_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &minimal_config());
    for name in ["a", "b"] {
        run_ok(&[
            "run",
            "--config",
            &cfg,
            "--out",
            dir.path().join(name).to_str().unwrap(),
            "--override",
            "seed=5",
        ]);
    }
    let a = std::fs::read(dir.path().join("a/trace.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/trace.csv")).unwrap();
    assert_eq!(a, b);
    let sa = std::fs::read(dir.path().join("a/summary.json")).unwrap();
    let sb = std::fs::read(dir.path().join("b/summary.json")).unwrap();
    assert_eq!(sa, sb);
}

#[test]
fn dotted_override_reaches_nested_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &minimal_config());
    let out_dir = dir.path().join("out");
    run_ok(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--override",
        "schedule.lambda=0.5",
        "--rounds",
        "7",
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["rounds"], 7);
    assert_eq!(summary["config"]["schedule"]["lambda"], 0.5);
}

#[test]
fn mistyped_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &minimal_config());
    let out = bin()
        .args([
            "run",
            "--config",
            &cfg,
            "--out",
            dir.path().join("o").to_str().unwrap(),
            "--override",
            "rounds=soon",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_single_seed_has_zero_std() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &minimal_config());
    let out_dir = dir.path().join("sweep");
    run_ok(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--seeds",
        "11",
    ]);
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("sweep-summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["final"]["risk"]["std"], 0.0);
    assert!(out_dir.join("seed-11/trace.csv").exists());
}

#[test]
fn sweep_distinct_data_seeds_vary_and_duplicates_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &minimal_config());
    let out_dir = dir.path().join("sweep");
    // The master seed doubles as the data seed here, so distinct seeds mean
    // distinct sampled datasets and the final risk varies across runs.
    run_ok(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--seeds",
        "1,2,3,3",
    ]);
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("sweep-summary.json")).unwrap(),
    )
    .unwrap();
    assert!(summary["final"]["risk"]["std"].as_f64().unwrap() > 0.0);
    let rows = summary["per_seed"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let dup: Vec<&serde_json::Value> =
        rows.iter().filter(|r| r["seed"] == 3).collect();
    assert_eq!(dup.len(), 2);
    assert_eq!(dup[0], dup[1]);
}

#[test]
fn check_graph_three_cycle_finds_violation() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("cycle.txt");
    std::fs::write(&graph, "M 3\n0 1\n1 0\n1 2\n2 1\n2 0\n0 2\n").unwrap();
    let out = run_ok(&[
        "check-graph",
        "--graph",
        graph.to_str().unwrap(),
        "--b",
        "1",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["min_degree_heuristic"], false);
    assert_eq!(report["exact"], false);
    assert_eq!(report["falsifier"]["violation_found"], true);
    assert!(report["falsifier"]["witness"].is_object());
}

#[test]
fn check_graph_complete_b0_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k3.txt");
    std::fs::write(&graph, "M 3\n0 1\n1 0\n1 2\n2 1\n2 0\n0 2\n").unwrap();
    let out = run_ok(&["check-graph", "--graph", graph.to_str().unwrap(), "--b", "0"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["min_degree_heuristic"], true);
    assert_eq!(report["exact"], true);
    assert_eq!(report["falsifier"]["violation_found"], false);
}

#[test]
fn check_graph_large_refuses_exact_but_reports_rest() {
    let dir = tempfile::tempdir().unwrap();
    let mut edges = String::from("M 40\n");
    for i in 0..40usize {
        for j in 0..40usize {
            if i != j {
                edges.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    let graph = dir.path().join("k40.txt");
    std::fs::write(&graph, edges).unwrap();
    let out = run_ok(&[
        "check-graph",
        "--graph",
        graph.to_str().unwrap(),
        "--b",
        "2",
        "--budget",
        "1000",
        "--trials",
        "5",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["exact"]["refused"].is_string());
    assert_eq!(report["min_degree_heuristic"], true);
    assert_eq!(report["falsifier"]["violation_found"], false);
}

#[test]
fn gen_data_least_squares_feeds_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    run_ok(&[
        "gen-data",
        "--out",
        data_dir.to_str().unwrap(),
        "--kind",
        "least-squares",
        "--nodes",
        "4",
        "--per-node",
        "15",
        "--dim",
        "3",
        "--seed",
        "9",
    ]);
    let csv = data_dir.join("dataset.csv");
    assert!(csv.exists());
    let mut value = minimal_config();
    value["dataset"] = serde_json::json!({ "type": "csv", "path": csv.to_str().unwrap() });
    let cfg = write_config(dir.path(), &value);
    run_ok(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
}

#[test]
fn gen_data_images_writes_idx_files() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("imgs");
    run_ok(&[
        "gen-data",
        "--out",
        data_dir.to_str().unwrap(),
        "--kind",
        "images",
        "--rows",
        "6",
        "--cols",
        "6",
        "--train-count",
        "40",
        "--test-count",
        "10",
        "--seed",
        "2",
    ]);
    for name in [
        "train-images-idx3-ubyte",
        "train-labels-idx1-ubyte",
        "t10k-images-idx3-ubyte",
        "t10k-labels-idx1-ubyte",
    ] {
        assert!(data_dir.join(name).exists(), "{name} missing");
    }
}
