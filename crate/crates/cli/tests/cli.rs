use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bregproj(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bregproj")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.display().to_string()
}

fn paging_config(out: &str) -> Value {
    json!({
        "schema_version": 1,
        "algorithm": "paging",
        "seed": 9,
        "instances": {
            "source": "generate",
            "count": 2,
            "spec": {
                "algorithm": "paging", "n": 3, "k": 2, "h": 2, "weight_range": [1.0, 1.0],
                "requests": { "model": "cyclic_k_plus_1", "length": 30 }
            }
        },
        "audit": "full",
        "output": { "trace": format!("{out}/trace.jsonl"), "summary": format!("{out}/summary.csv"), "plot": format!("{out}/plot.csv") }
    })
}

fn kserver_config(out: &str) -> Value {
    json!({
        "schema_version": 1,
        "algorithm": "kserver",
        "seed": 4,
        "instances": {
            "source": "generate",
            "count": 1,
            "spec": {
                "algorithm": "kserver",
                "tree": { "kind": "hst", "branching": 2, "depth": 3, "ratio": 0.1, "root_weight": 1.0 },
                "k": 3, "h": 2,
                "requests": { "model": "uniform_random", "length": 10 }
            }
        },
        "audit": "full",
        "output": { "trace": format!("{out}/trace.jsonl"), "summary": format!("{out}/summary.csv"), "plot": format!("{out}/plot.csv") }
    })
}

#[test]
fn gen_tree_is_deterministic_and_flags_uniform_weights() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = bregproj(&["gen-tree", "--random", "--depth", "3", "--seed", "5", "--out", name], dir.path());
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(dir.path().join("a.json")).unwrap(), std::fs::read(dir.path().join("b.json")).unwrap());

    let out = bregproj(&["gen-tree", "--branching", "2", "--depth", "2", "--ratio", "1"], dir.path());
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["metadata"]["hst"], json!(false));
    assert_eq!(v["nodes"].as_array().unwrap().len(), 7);
}

#[test]
fn cyclic_requests_repeat_in_order() {
    let dir = tempfile::tempdir().unwrap();
    assert!(bregproj(&["gen-tree", "--branching", "3", "--depth", "1", "--out", "t.json"], dir.path()).status.success());
    let out = bregproj(
        &["gen-requests", "--tree", "t.json", "--k", "2", "--h", "2", "--model", "cyclic-k-plus-1", "--length", "9"],
        dir.path(),
    );
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let reqs: Vec<&str> = v["requests"].as_array().unwrap().iter().map(|r| r.as_str().unwrap()).collect();
    assert_eq!(reqs.len(), 9);
    for t in 3..9 {
        assert_eq!(reqs[t], reqs[t - 3]);
    }
    let mut first: Vec<&str> = reqs[..3].to_vec();
    first.sort_unstable();
    first.dedup();
    assert_eq!(first.len(), 3);
}

#[test]
fn run_writes_identical_outputs_and_respects_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "paging.json", &paging_config("out"));
    let first = bregproj(&["run", "--config", &cfg], dir.path());
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let text = String::from_utf8_lossy(&first.stdout);
    assert!(text.contains("bound holds: 2, violated: 0"), "{text}");
    let again = bregproj(&["run", "--config", &cfg, "--out-dir", "again"], dir.path());
    assert!(again.status.success());
    for f in ["trace.jsonl", "summary.csv", "plot.csv"] {
        let a = std::fs::read(dir.path().join("out").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("again").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f} differs between runs");
    }
    let report = bregproj(&["report", "out/summary.csv"], dir.path());
    assert!(report.status.success());
    assert!(String::from_utf8_lossy(&report.stdout).contains("instances: 2"));
}

#[test]
fn full_audit_on_kserver_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k.json", &kserver_config("out"));
    let out = bregproj(&["run", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 failed"));
}

#[test]
fn missing_input_exits_with_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = bregproj(&["opt", "--instance", "nope.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.json"));

    let mut bad = paging_config("out");
    bad["schema_version"] = json!(99);
    let cfg = write_config(dir.path(), "bad.json", &bad);
    assert_eq!(bregproj(&["run", "--config", &cfg], dir.path()).status.code(), Some(2));
}

#[test]
fn sweep_cap_exits_with_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = kserver_config("out");
    cfg["tolerances"] = json!({
        "projection": { "tol_feas": 1e-9, "tol_inner": 1e-12, "max_sweeps": 1, "tol_start": 1e-7, "tol_certificate": 1e-6 },
        "bound": 1e-6
    });
    let path = write_config(dir.path(), "cap.json", &cfg);
    let out = bregproj(&["run", "--config", &path], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn violated_bound_exits_with_audit_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = paging_config("out");
    // A slack of −10⁶ makes every bound fail, exercising the exit path.
    cfg["tolerances"] = json!({
        "projection": { "tol_feas": 1e-9, "tol_inner": 1e-12, "max_sweeps": 100000, "tol_start": 1e-7, "tol_certificate": 1e-6 },
        "bound": -1e6
    });
    let path = write_config(dir.path(), "neg.json", &cfg);
    assert_eq!(bregproj(&["run", "--config", &path], dir.path()).status.code(), Some(4));
}

#[test]
fn opt_solves_each_instance_kind() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sc.json"), r#"{"n":2,"rows":[[1,0],[0,1]]}"#).unwrap();
    let out = bregproj(&["opt", "--instance", "sc.json"], dir.path());
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["cost"], json!(2.0));

    std::fs::write(
        dir.path().join("pg.json"),
        r#"{"weights":[1.0,1.0],"k":1,"h":1,"requests":[1,0,1,0],"initial":[0]}"#,
    )
    .unwrap();
    let v: Value = serde_json::from_slice(&bregproj(&["opt", "--instance", "pg.json"], dir.path()).stdout).unwrap();
    assert_eq!(v["cost"], json!(4.0));
}
