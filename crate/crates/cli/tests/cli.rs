use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vass-asym")).args(args).env("VASS_ASYM_THREADS", "1").output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn symmetric_walk_termination_is_tight_quadratic() {
    let walk = model("symmetric_walk.json");
    let r = ok_json(&["analyze", path(&walk), "--measure", "L"]);
    let e = &r["estimates"][0];
    assert_eq!(e["label"], "TightQuadratic");
    assert_eq!(e["witness"]["kind"], "bscc");
    assert_eq!(e["witness"]["class"], "UnboundedZero");
    assert_eq!(r["engine"], "one-dimensional");
}

#[test]
fn pumping_chain_counter_table() {
    let chain = model("pumping_chain.json");
    let r = ok_json(&["analyze", path(&chain), "--measure", "C:3"]);
    let find = |ty: &[&str]| {
        r["estimates"].as_array().unwrap().iter().find(|e| e["type"] == serde_json::json!(ty)).unwrap().clone()
    };
    assert_eq!(find(&["M1", "M2"])["label"], "LowerQuadratic");
    assert_eq!(find(&["M1", "M3"])["label"], "TightLinear");
    let m14 = find(&["M1", "M4"]);
    assert_eq!(m14["label"], "LowerQuadratic");
    assert_eq!(m14["beyond_quadratic"], true);
}

#[test]
fn types_listing_has_seven_weighted_types() {
    let r = ok_json(&["types", path(&model("pumping_chain.json"))]);
    let mut weights: Vec<&str> = r["types"].as_array().unwrap().iter().map(|t| t["weight"].as_str().unwrap()).collect();
    weights.sort();
    assert_eq!(weights, ["1", "1", "1", "1", "1", "1/2", "1/2"]);
}

#[test]
fn mecs_listing() {
    let r = ok_json(&["mecs", path(&model("pumping_chain.json"))]);
    assert_eq!(r["dag_like"], true);
    assert_eq!(r["mecs"].as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes() {
    let out = run(&["analyze", path(&model("non_dag.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MEC decomposition not DAG-like"));
    assert_eq!(run(&["analyze", "/nonexistent/model.json"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", path(&model("symmetric_walk.json")), "--measure", "Q"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", path(&model("symmetric_walk.json")), "--measure", "C:2"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["energy", path(&model("pumping_chain.json"))]).status.code(), Some(2));
}

#[test]
fn energy_answers() {
    assert_eq!(ok_json(&["energy", path(&model("symmetric_walk.json"))]), "Unsafe");
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k3.json");
    std::fs::write(&graph, r#"{"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"], ["c", "a"]]}"#).unwrap();
    let out = run(&["gen-hamiltonian", path(&graph), "a"]);
    assert_eq!(out.status.code(), Some(0));
    let gadget = dir.path().join("k3_gadget.json");
    std::fs::write(&gadget, &out.stdout).unwrap();
    let r = ok_json(&["energy", path(&gadget)]);
    assert!(r["Safe"]["witness"].is_object());
    assert_eq!(run(&["gen-hamiltonian", path(&graph), "z"]).status.code(), Some(1));
}

#[test]
fn simulation_is_deterministic_and_exports_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let walk = model("symmetric_walk.json");
    let args = ["simulate", path(&walk), "--n", "1,4", "--runs", "200", "--seed", "7", "--horizon", "1000"];
    let a = run(&args);
    let b = run(&[&args[..], &["--csv", path(&csv)]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 400);
    assert!(text.starts_with("n,run,truncated,steps,mecs,L"));
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["sizes"].as_array().unwrap().len(), 2);
}

#[test]
fn witness_strategy_drives_the_pumping_chain() {
    let r = ok_json(&[
        "simulate",
        path(&model("pumping_chain.json")),
        "--strategy",
        "witness",
        "--init",
        "m1_a",
        "--n",
        "4",
        "--runs",
        "50",
        "--max-steps",
        "20000",
        "--measure",
        "C:3",
        "--measure",
        "L",
    ]);
    let size = &r["sizes"][0];
    assert_eq!(size["runs"], 50);
    assert!(size["measures"]["C[3]"].is_object());
    let bad = run(&["simulate", path(&model("pumping_chain.json")), "--strategy", "/nonexistent.json", "--n", "4"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn report_matches_published_schema_and_text_projection() {
    let schema: Value = serde_json::from_str(include_str!("../../../schemas/analysis-report.schema.json")).unwrap();
    let required = |v: &Value| -> Vec<String> {
        v["required"].as_array().unwrap().iter().map(|k| k.as_str().unwrap().to_string()).collect()
    };
    for m in ["symmetric_walk.json", "pumping_chain.json"] {
        let file = model(m);
        let r = ok_json(&["analyze", path(&file)]);
        let obj = r.as_object().unwrap();
        for k in required(&schema) {
            assert!(obj.contains_key(&k), "{m}: missing {k}");
        }
        for k in obj.keys() {
            assert!(schema["properties"].get(k).is_some(), "{m}: unexpected {k}");
        }
        let text = String::from_utf8(run(&["analyze", path(&file), "--text"]).stdout).unwrap();
        for e in r["estimates"].as_array().unwrap() {
            for k in required(&schema["$defs"]["estimate"]) {
                assert!(e.get(&k).is_some(), "{m}: estimate missing {k}");
            }
            assert!(text.contains(e["tag"].as_str().unwrap()));
            assert!(text.contains(e["label"].as_str().unwrap()));
        }
        assert!(text.contains(r["model_digest"].as_str().unwrap()));
    }
}
