use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn exp_cp(rate: f64) -> Value {
    json!({"family": "compound_poisson", "rate": rate, "jumps": {"law": "exponential", "rate": 1}})
}

fn config(x: Value, y: Value, order: &str) -> Value {
    json!({
        "process_x": x,
        "process_y": y,
        "order": order,
        "horizon": 1,
        "grid_size": 20,
        "n_paths": 400,
        "seed": 3
    })
}

fn run(dir: &Path, cfg: &Value, args: &[&str]) -> (Output, PathBuf) {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    let out = dir.join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_pii-order"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .arg("--no-timestamp")
        .output()
        .unwrap();
    (o, out)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ordered() -> Value {
    config(
        json!({"kernel": exp_cp(1.0)}),
        json!({"drift": 0.7, "kernel": exp_cp(2.0)}),
        "pst",
    )
}

fn reversed() -> Value {
    config(json!({"kernel": exp_cp(2.0)}), json!({"kernel": exp_cp(1.0)}), "st")
}

#[test]
fn identical_processes_satisfy_st() {
    let d = tempfile::tempdir().unwrap();
    let p = json!({"drift": 0.1, "kernel": exp_cp(1.0)});
    let (o, out) = run(d.path(), &config(p.clone(), p, "st"), &["check"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "satisfied");
    assert_eq!(report["method_used"], "tails");
}

#[test]
fn compensating_drift_gives_pst() {
    let d = tempfile::tempdir().unwrap();
    let (o, _) = run(d.path(), &ordered(), &["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn reversed_pair_is_violated_with_tail_witness() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = run(d.path(), &reversed(), &["check"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("tail at t ="), "{}", stdout(&o));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "violated");
    assert!(!report["attempts"][0]["report"]["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn simulate_refuses_unchecked_then_forces() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = run(d.path(), &reversed(), &["simulate"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.join("paths.csv").exists());
    let (o, out) = run(d.path(), &reversed(), &["simulate", "--force"]);
    assert_eq!(o.status.code(), Some(0));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["violations"].as_u64().unwrap() > 0);
    assert!(stdout(&o).contains("order violations: "));
}

#[test]
fn ordered_simulation_has_no_violations() {
    let d = tempfile::tempdir().unwrap();
    let (o, out) = run(d.path(), &ordered(), &["simulate"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("order violations: 0"));
    let csv = std::fs::read_to_string(out.join("paths.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "path,t,X,Y");
    assert_eq!(rows.len(), 1 + 400 * 21);
    assert!(csv.contains("# seed: 3"));
}

#[test]
fn single_path_is_reproducible_and_seed_flag_overrides() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = ordered();
    cfg["n_paths"] = json!(1);
    let (_, out) = run(d.path(), &cfg, &["simulate"]);
    let a = std::fs::read(out.join("paths.csv")).unwrap();
    let (_, out) = run(d.path(), &cfg, &["simulate"]);
    assert_eq!(a, std::fs::read(out.join("paths.csv")).unwrap());
    let (_, out) = run(d.path(), &cfg, &["simulate", "--seed", "4"]);
    assert_ne!(a, std::fs::read(out.join("paths.csv")).unwrap());
}

#[test]
fn cut_simulation_writes_paired_events() {
    let d = tempfile::tempdir().unwrap();
    let common = json!({"family": "compound_poisson", "rate": 1, "jumps": {"law": "point", "at": -0.5}});
    let x = json!({"kernel": {"family": "sum", "parts": [common,
        {"family": "compound_poisson", "rate": 0.3, "jumps": {"law": "uniform", "lo": 0.2, "hi": 0.8}}]}});
    let y = json!({"drift": 1, "kernel": {"family": "sum", "parts": [common,
        {"family": "compound_poisson", "rate": 0.5, "jumps": {"law": "uniform", "lo": 1.5, "hi": 3.0}}]}});
    let mut cfg = config(x, y, "st");
    cfg["cut"] = json!({"k": 1});
    cfg["method"] = json!("cut");
    let (o, out) = run(d.path(), &cfg, &["simulate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("order violations: 0"));
    let paired = std::fs::read_to_string(out.join("paired.csv")).unwrap();
    assert!(paired.contains("path,tau,y,x,u,accepted"));
    assert!(paired.lines().filter(|l| !l.starts_with('#')).count() > 50);
}

#[test]
fn verify_identical_gives_zero_differences() {
    let d = tempfile::tempdir().unwrap();
    let p = json!({"kernel": exp_cp(1.0)});
    let (o, out) = run(d.path(), &config(p.clone(), p, "st"), &["verify"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["design"], "paired-coupled");
    assert!(r["mc"]["rows"].as_array().unwrap().iter().all(|row| row["estimate_diff"] == 0.0));
}

#[test]
fn verify_ordered_icx_pair() {
    let d = tempfile::tempdir().unwrap();
    let y = json!({"kernel": {"family": "sum", "parts": [exp_cp(1.0),
        {"family": "compound_poisson", "rate": 1, "jumps": {"law": "point", "at": 2}}]}});
    let (o, out) = run(d.path(), &config(json!({"kernel": exp_cp(1.0)}), y, "icx"), &["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["mc"]["class"], "icx");
}

#[test]
fn verify_reversed_lists_failures() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = reversed();
    cfg["n_paths"] = json!(4000);
    let (o, out) = run(d.path(), &cfg, &["verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("failing: "));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["design"], "independent");
    assert!(!r["failing"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_config_names_the_key() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = ordered();
    cfg["process_y"]["kernel"]["rate"] = json!(-1);
    let (o, _) = run(d.path(), &cfg, &["check"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("process_y.kernel.rate"));
    let mut cfg = ordered();
    cfg["n_pahts"] = json!(3);
    let (o, _) = run(d.path(), &cfg, &["check"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_pahts"));
}
