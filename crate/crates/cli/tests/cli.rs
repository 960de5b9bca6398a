use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn stance(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stance"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn manifest(dir: &Path, body: &str) -> PathBuf {
    let gs = corpus().join("gas_station");
    let text = body.replace("@", path(&gs));
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_reports_counts() {
    let o = stance(&[
        "validate",
        "--format",
        "json",
        path(&corpus().join("gas_station/gsMt.mt")),
    ]);
    let v = json(&o);
    let f = &v["files"][0];
    assert_eq!(f["valid"], true);
    assert_eq!(f["facts"], 8);
    assert_eq!(f["rationale_roots"], 1);
}

#[test]
fn validate_points_at_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mt");
    fs::write(&bad, "(flee customer)\n(why (flee customer)\n").unwrap();
    let empty = dir.path().join("empty.mt");
    fs::write(&empty, "; nothing here\n").unwrap();
    let o = stance(&["validate", path(&bad), path(&empty)]);
    assert_eq!(code(&o), 2);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("FAIL") && out.contains("bad.mt:2:"), "{out}");
    assert!(out.contains("warning: no facts"), "{out}");
    assert_eq!(code(&stance(&["validate", path(&empty)])), 0);
}

#[test]
fn match_binds_bed_to_fire() {
    let c = corpus().join("classic");
    let v = json(&stance(&[
        "match",
        "--format",
        "json",
        path(&c.join("cold.mt")),
        path(&c.join("slumber.mt")),
    ]));
    let bindings = &v["gmaps"][0]["bindings"];
    assert!(bindings
        .as_array()
        .unwrap()
        .iter()
        .any(|b| b["base"] == "fire_cMt" && b["target"] == "bed"));
}

#[test]
fn match_introduces_skolems() {
    let gs = corpus().join("gas_station");
    let o = stance(&[
        "match",
        path(&gs.join("cfMt.mt")),
        path(&gs.join("target.mt")),
        "--vocabulary",
        path(&corpus().join("events.mt")),
    ]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("skolem_car_cfMt"), "{out}");
    assert!(out.contains("discarded (unobserved event)"), "{out}");
}

#[test]
fn disjoint_vocabularies_give_no_gmaps() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.mt");
    let b = dir.path().join("b.mt");
    fs::write(&a, "(likes x y)\n").unwrap();
    fs::write(&b, "(owns p q)\n").unwrap();
    let v = json(&stance(&["match", "--format", "json", path(&a), path(&b)]));
    assert_eq!(v["gmaps"].as_array().unwrap().len(), 0);
}

#[test]
fn synthesize_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let m = corpus().join("gas_station/manifest.toml");
    let o = stance(&["synthesize", path(&m), "--out", path(&out)]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.starts_with("ordering (manifest): gsMt daMt dcMt cfMt"),
        "{text}"
    );
    let first = fs::read_to_string(out.join("synthesis.json")).unwrap();
    let final_mt = out.join("target_final.mt");
    assert!(fs::read_to_string(out.join("synthesis.dot"))
        .unwrap()
        .contains("dashed"));
    assert_eq!(code(&stance(&["validate", path(&final_mt)])), 0);
    stance(&["synthesize", path(&m), "--out", path(&out)]);
    assert_eq!(
        fs::read_to_string(out.join("synthesis.json")).unwrap(),
        first
    );
    let report: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(report["passes"], 2);
}

#[test]
fn reversed_bases_reach_the_same_facts() {
    let dir = tempfile::tempdir().unwrap();
    let forward = json(&stance(&[
        "synthesize",
        "--format",
        "json",
        path(&corpus().join("gas_station/manifest.toml")),
    ]));
    let m = manifest(
        dir.path(),
        "target = \"@/target.mt\"\nbases = [\"@/dcMt.mt\", \"@/daMt.mt\", \"@/gsMt.mt\"]\nvocabulary = \"@/../events.mt\"\nheuristic = false\n",
    );
    let reversed = json(&stance(&["synthesize", "--format", "json", path(&m)]));
    let facts = |v: &Value| {
        let mut f: Vec<String> = v["final_facts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.to_string())
            .collect();
        f.sort();
        f
    };
    let without_cf = json(&stance(&[
        "synthesize",
        "--format",
        "json",
        path(&manifest(
            dir.path(),
            "target = \"@/target.mt\"\nbases = [\"@/gsMt.mt\", \"@/daMt.mt\", \"@/dcMt.mt\"]\nvocabulary = \"@/../events.mt\"\nheuristic = false\n",
        )),
    ]));
    assert_eq!(facts(&reversed), facts(&without_cf));
    assert!(facts(&forward).len() >= facts(&reversed).len());
}

#[test]
fn empty_base_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), "target = \"@/target.mt\"\nbases = []\n");
    assert_eq!(code(&stance(&["synthesize", path(&m)])), 1);
}

#[test]
fn unknown_manifest_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        dir.path(),
        "target = \"@/target.mt\"\nbases = [\"@/gsMt.mt\"]\nheuristics = true\n",
    );
    assert_eq!(code(&stance(&["synthesize", path(&m)])), 1);
}

#[test]
fn one_pass_does_not_converge() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        dir.path(),
        "target = \"@/target.mt\"\nbases = [\"@/gsMt.mt\"]\nvocabulary = \"@/../events.mt\"\nmax_passes = 1\n",
    );
    let o = stance(&["synthesize", path(&m)]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn merge_cap_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[sme]\nmerge_cap = 1\n").unwrap();
    let gs = corpus().join("gas_station");
    let o = stance(&[
        "match",
        path(&gs.join("gsMt.mt")),
        path(&gs.join("target.mt")),
        "--config",
        path(&cfg),
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("more than 1"));
}

#[test]
fn parse_errors_in_manifests_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.mt");
    fs::write(&bad, "(flee customer\n").unwrap();
    let m = dir.path().join("m.toml");
    fs::write(
        &m,
        format!(
            "target = \"broken.mt\"\nbases = [\"{}\"]\n",
            path(&corpus().join("gas_station/gsMt.mt"))
        ),
    )
    .unwrap();
    assert_eq!(code(&stance(&["synthesize", path(&m)])), 2);
}

#[test]
fn bad_config_and_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[learn]\nepisodez = 3\n").unwrap();
    assert_eq!(
        code(&stance(&["train", "slumber", "--config", path(&cfg)])),
        1
    );
    assert_eq!(code(&stance(&["simulate", "garden"])), 1);
    assert_eq!(code(&stance(&["frobnicate"])), 1);
    let m = corpus().join("gas_station/manifest.toml");
    assert_eq!(code(&stance(&["order", path(&m), "--format", "dot"])), 1);
    assert_eq!(code(&stance(&["--help"])), 0);
}

#[test]
fn order_echoes_weights() {
    let v = json(&stance(&[
        "order",
        "--format",
        "json",
        path(&corpus().join("gas_station/manifest.toml")),
    ]));
    assert_eq!(v["weights"].as_array().unwrap().len(), 4);
    assert_eq!(v["order"].as_array().unwrap().len(), 4);
}

#[test]
fn observe_then_chronicle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(
        code(&stance(&[
            "train",
            "slumber",
            "--seed",
            "7",
            "--out",
            path(out)
        ])),
        0
    );
    let policy = out.join("slumber.policy.json");
    let o = stance(&[
        "simulate",
        "slumber",
        "--policy",
        path(&policy),
        "--out",
        path(out),
    ]);
    assert_eq!(code(&o), 0);
    let traces: Vec<String> = (20..30)
        .map(|s| path(&out.join(format!("slumber_{s}.trace.json"))).to_string())
        .collect();
    let mut args = vec!["chronicle", "--format", "json", "--out", path(out)];
    args.extend(traces.iter().map(String::as_str));
    let v = json(&stance(&args));
    assert_eq!(v["representatives"].as_array().unwrap().len(), 3);
    let mts: Vec<String> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "mt"))
        .map(|p| path(&p).to_string())
        .collect();
    assert_eq!(mts.len(), 13);
    let mut args = vec!["validate"];
    args.extend(mts.iter().map(String::as_str));
    assert_eq!(code(&stance(&args)), 0);
    let wrong = stance(&["simulate", "dinner", "--policy", path(&policy)]);
    assert_eq!(code(&wrong), 1);
}

#[test]
fn evaluate_separates_behaviors() {
    let v = json(&stance(&["evaluate", "--format", "json"]));
    assert_eq!(v["behaviors"].as_array().unwrap().len(), 5);
    assert!(v["diagonal_minimum_rows"].as_u64().unwrap() >= 4);
}

#[test]
fn export_dot_dashes_new_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("syn");
    let gs = corpus().join("gas_station");
    stance(&[
        "synthesize",
        path(&gs.join("manifest.toml")),
        "--out",
        path(&out),
    ]);
    let o = stance(&[
        "export-dot",
        path(&out.join("target_final.mt")),
        "--original",
        path(&gs.join("target.mt")),
    ]);
    assert_eq!(code(&o), 0);
    let dot = String::from_utf8(o.stdout).unwrap();
    assert!(dot.starts_with("digraph") && dot.contains("style=dashed"));
    let plain =
        String::from_utf8(stance(&["export-dot", path(&gs.join("target.mt"))]).stdout).unwrap();
    assert!(!plain.contains("dashed"));
}

#[test]
fn schema_documents_match_emitted_ids() {
    use stance_cli::commands::*;
    use stance_core::report::{ANALOGY_SCHEMA, SYNTHESIS_SCHEMA};
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas");
    for id in [
        ANALOGY_SCHEMA,
        SYNTHESIS_SCHEMA,
        VALIDATE_SCHEMA,
        ORDER_SCHEMA,
        POLICY_SCHEMA,
        TRACE_SCHEMA,
        CHRONICLE_SCHEMA,
        CONFUSION_SCHEMA,
    ] {
        let name = id.trim_start_matches("stance.").trim_end_matches("/1");
        let doc: Value =
            serde_json::from_str(&fs::read_to_string(dir.join(format!("{name}.json"))).unwrap())
                .unwrap();
        assert_eq!(doc["properties"]["schema"]["const"], id);
        assert_eq!(doc["$id"], id);
    }
}
