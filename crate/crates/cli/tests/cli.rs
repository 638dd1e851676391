use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sbmis(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbmis")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

/// Edges of a 1-based cycle on `n` nodes.
fn cycle(n: usize) -> String {
    let edges: Vec<String> = (1..=n).map(|i| format!("[{i},{}]", i % n + 1)).collect();
    format!("{{\"num_nodes\":{n},\"edges\":[{}]}}", edges.join(","))
}

#[test]
fn solve_mis_path() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "p3.json", r#"{"num_nodes": 3, "edges": [[1, 2], [2, 3]]}"#);
    let v = stdout_json(&sbmis(&["solve-mis", "p3.json", "--json"], dir.path()));
    assert_eq!(v["size"], 2);
    assert_eq!(v["nodes"], serde_json::json!([1, 3]));

    let o = sbmis(&["solve-mis", "p3.json", "--baseline", "--out", "sol.json"], dir.path());
    assert!(o.status.success());
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sol.json")).unwrap()).unwrap();
    assert_eq!(saved["nodes"], serde_json::json!([1, 3]));
    assert_eq!(saved["engine"], "baseline");
}

#[test]
fn solve_mis_flags_and_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c10.json", &cycle(10));
    let v = stdout_json(&sbmis(
        &["solve-mis", "c10.json", "--json", "--engine", "wide", "--c", "0.3", "--step", "200", "--seed", "3"],
        dir.path(),
    ));
    assert_eq!(v["size"], 5);
    assert_eq!(v["engine"], "wide");
    assert_eq!(v["params"]["c"], 0.3);
    assert_eq!(v["params"]["step"], 200);

    write(dir.path(), "cfg.json", r#"{"shots": 2, "params": {"c": 0.2, "dt": 0.4, "step": 300}}"#);
    let v = stdout_json(&sbmis(&["solve-mis", "c10.json", "--json", "--config", "cfg.json"], dir.path()));
    assert_eq!(v["params"]["dt"], 0.4);
    assert_eq!(v["size"], 5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sbmis(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(sbmis(&["solve-mis"], dir.path()).status.code(), Some(2));
    assert_eq!(sbmis(&["tdma", "run"], dir.path()).status.code(), Some(2));
    assert_eq!(sbmis(&["solve-mis", "x.json", "--engine", "gpu"], dir.path()).status.code(), Some(2));
    assert_eq!(sbmis(&["--help"], dir.path()).status.code(), Some(0));

    let o = sbmis(&["solve-mis", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));

    write(dir.path(), "bad.json", r#"{"num_nodes": 2, "edges": [[0, 1]]}"#);
    let o = sbmis(&["solve-mis", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1-based"));

    write(dir.path(), "g.json", &cycle(4));
    write(dir.path(), "cfg.json", r#"{"shotz": 3}"#);
    assert_eq!(sbmis(&["solve-mis", "g.json", "--config", "cfg.json"], dir.path()).status.code(), Some(1));
    assert_eq!(sbmis(&["solve-mis", "g.json", "--shots", "0"], dir.path()).status.code(), Some(1));
}

#[test]
fn encode_j_mis_ratio() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c64.json", &cycle(64));
    let v = stdout_json(&sbmis(&["encode-j", "c64.json", "--graph", "--json", "--out", "c64.idxj"], dir.path()));
    assert_eq!(v["n_v"], 2);
    assert_eq!(v["bits_per_entry"], 1);
    assert_eq!(v["ratio"], 1.0 / 32.0);
    let bytes = std::fs::read(dir.path().join("c64.idxj")).unwrap();
    assert_eq!(&bytes[..4], b"IDXJ");
    // header 24 bytes, two f64 table values, one u64 word per row
    assert_eq!(bytes.len(), 24 + 2 * 8 + 64 * 8);
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 64);
    let back = sbmis::indexed::EncodedJ::from_bytes(&bytes).unwrap();
    assert_eq!(back.n(), 64);
}

#[test]
fn encode_j_model_default_output() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "model.json", r#"{"n": 3, "j": [[0, 0.5, -1], [0.5, 0, 2], [-1, 2, 0]], "h": [0, 0, 0]}"#);
    let o = sbmis(&["encode-j", "model.json"], dir.path());
    assert!(o.status.success());
    let bytes = std::fs::read(dir.path().join("model.idxj")).unwrap();
    let e = sbmis::indexed::EncodedJ::from_bytes(&bytes).unwrap();
    assert_eq!(e.table().values(), &[-1.0, 0.0, 0.5, 2.0]);
    assert_eq!(sbmis::indexed::decode(&e).unwrap(), vec![0.0, 0.5, -1.0, 0.5, 0.0, 2.0, -1.0, 2.0, 0.0]);

    write(dir.path(), "asym.json", r#"{"n": 2, "j": [[0, 1], [2, 0]], "h": [0, 0]}"#);
    assert_eq!(sbmis(&["encode-j", "asym.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn tdma_bench_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbmis(&["tdma", "bench", "--ns", "200", "--class", "lif", "--instances", "5", "--seed", "4"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "condition,solver,slots_mean,slots_std,time_mean,time_std");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("lif_200,sb,"));
    assert!(lines[2].starts_with("lif_200,baseline,"));

    let v = stdout_json(&sbmis(
        &["tdma", "bench", "--ns", "30,40", "--radius", "0.4", "--instances", "2", "--json"],
        dir.path(),
    ));
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["runs"].as_array().unwrap().len(), 8);
}

#[test]
fn tdma_run_json() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&sbmis(&["tdma", "run", "--ns", "80", "--class", "hif", "--json"], dir.path()));
    assert_eq!(v["valid"], true);
    let slots = v["schedule"]["slots"].as_array().unwrap();
    assert_eq!(slots.len() as u64, v["total_slots"].as_u64().unwrap());
    assert!(v["total_slots"].as_u64().unwrap() >= v["tree_depth"].as_u64().unwrap());
    let mut all: Vec<u64> =
        slots.iter().flat_map(|s| s.as_array().unwrap().iter().map(|x| x.as_u64().unwrap())).collect();
    all.sort_unstable();
    assert_eq!(all, (1..=80).collect::<Vec<u64>>());
    assert_eq!(v["trace"].as_array().unwrap().len(), slots.len());
}

#[test]
fn tuning_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "g.json", &cycle(12));
    write(p, "grid.json", r#"{"grid": {"c": [0.1, 0.4], "dt": [0.2, 0.5], "step": [50, 100]}, "shots_per_point": 4}"#);
    let v = stdout_json(&sbmis(&["grid-search", "g.json", "--config", "grid.json", "--json"], p));
    assert_eq!(v["points"].as_array().unwrap().len(), 8);
    assert!(!v["best"].as_array().unwrap().is_empty());

    write(
        p,
        "dataset.json",
        r#"{"count": 24, "n_min": 10, "n_max": 20, "grid": {"grid": {"c": [0.1, 0.4], "dt": [0.2, 0.5], "step": [50, 100]}, "shots_per_point": 4}}"#,
    );
    let v = stdout_json(&sbmis(&["build-dataset", "--config", "dataset.json", "--out", "ds.jsonl", "--json"], p));
    assert_eq!(v["graphs"], 24);
    let lines = std::fs::read_to_string(p.join("ds.jsonl")).unwrap().lines().count() as u64;
    assert_eq!(v["records"].as_u64().unwrap(), lines);

    write(p, "est.json", r#"{"holdout_fraction": 0.0, "trees": {"n_trees": 20}}"#);
    let o = sbmis(&["train-estimator", "ds.jsonl", "--config", "est.json", "--out", "estimator.json"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = sbmis(&["measure-latency", "--sizes", "8,16", "--steps", "10,20", "--repeats", "1", "--out", "lat.csv"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(p.join("lat.csv")).unwrap();
    assert!(csv.starts_with("n,step,t_wide,t_light,label"));
    assert_eq!(csv.lines().count(), 5);
    let o = sbmis(&["train-selector", "lat.csv", "--out", "selector.json"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let v = stdout_json(&sbmis(
        &["solve-mis", "g.json", "--estimator", "estimator.json", "--selector", "selector.json", "--json"],
        p,
    ));
    assert_eq!(v["size"], 6);
    let step = v["params"]["step"].as_u64().unwrap();
    assert!((50..=100_000).contains(&step));

    assert_eq!(sbmis(&["train-estimator", "lat.csv"], p).status.code(), Some(1));
}
