use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn acmkin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acmkin")).args(args).env("ACMKIN_SEED", "0").output().unwrap()
}

/// Per-test scratch file; tests run in parallel.
fn scratch(name: &str) -> PathBuf {
    let test = std::thread::current().name().unwrap_or("main").replace("::", "_");
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli_tests").join(test);
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn export(name: &str) -> (PathBuf, Value) {
    let out = acmkin(&["catalog", name, "--export"]);
    assert_eq!(out.status.code(), Some(0));
    let path = scratch(&format!("{}.json", name));
    std::fs::write(&path, &out.stdout).unwrap();
    (path, serde_json::from_slice(&out.stdout).unwrap())
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{}: {}", e, String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn exported_manifest_reproduces_catalog_limit() {
    for name in ["revolute", "linked_revolutes", "cylindrical", "product_union"] {
        let (path, _) = export(name);
        let direct = acmkin(&["catalog", name, "--limit", "--json"]);
        let via_file = acmkin(&["limit", path.to_str().unwrap(), "--json"]);
        assert_eq!(direct.status.code(), Some(0), "{}", name);
        assert_eq!(direct.stdout, via_file.stdout, "{}", name);
    }
}

#[test]
fn limit_reports_apex_dimension() {
    let out = acmkin(&["catalog", "sliding_hinge", "--limit", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["limit"]["apex_dim"], 5);
}

#[test]
fn obstructed_limit_exits_3() {
    let out = acmkin(&["catalog", "nonexample", "--limit", "--json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["limit"]["status"], "obstructed");
}

#[test]
fn failed_axiom_exits_2() {
    let (_, mut m) = export("revolute");
    for morph in m["morphisms"].as_array_mut().unwrap() {
        if morph["actor"] == "B" {
            morph["components"] = serde_json::json!(["0", "y"]);
        }
    }
    let path = scratch("revolute_degenerate.json");
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let out = acmkin(&["validate", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn malformed_input_exits_4() {
    let (_, mut m) = export("rigid_bar");
    m["colour"] = "red".into();
    let path = scratch("rigid_bar_extra_key.json");
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(acmkin(&["validate", path.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(acmkin(&["validate", "/nonexistent/manifest.json"]).status.code(), Some(4));
    assert_eq!(acmkin(&["frobnicate"]).status.code(), Some(4));
    let bad_seed = Command::new(env!("CARGO_BIN_EXE_acmkin")).args(["catalog"]).env("ACMKIN_SEED", "x").output().unwrap();
    assert_eq!(bad_seed.status.code(), Some(4));
}

#[test]
fn unknown_linkage_exits_2() {
    assert_eq!(acmkin(&["catalog", "four_bar"]).status.code(), Some(2));
}

#[test]
fn sample_writes_csv_with_apex_header() {
    let (path, _) = export("revolute");
    let out = acmkin(&["sample", path.to_str().unwrap(), "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    assert!(header.len() >= 4, "{:?}", header);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.len(), header.len());
        assert!(r.iter().all(|v| v.parse::<f64>().is_ok()));
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: 0"));
}

#[test]
fn transcript_replays() {
    let (path, _) = export("bar_path");
    let t = scratch("bar_path_transcript.json");
    let p = path.to_str().unwrap();
    assert_eq!(acmkin(&["limit", p, "--transcript", t.to_str().unwrap()]).status.code(), Some(0));
    let out = acmkin(&["limit", p, "--replay", t.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["replay"]["matches"], true);
}

#[test]
fn weld_of_cyclic_pair_is_obstructed() {
    let (path, _) = export("three_bar");
    let out = acmkin(&["weld", path.to_str().unwrap(), "A1", "A3", "--json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn pendulum_daemon_slice_is_one_dimensional() {
    let (path, _) = export("pendulum");
    let out = acmkin(&["daemon-slice", path.to_str().unwrap(), "--t", "0.25", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["slice"]["dim"], 1);
}

#[test]
fn pair_check_reports_cylindrical_normal_form() {
    let (path, _) = export("cylindrical");
    let out = acmkin(&["pair-check", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v.to_string().contains("\"h_dim\":2"), "{}", v);
}

#[test]
fn text_and_json_modes_differ_only_in_rendering() {
    let text = acmkin(&["catalog", "rigid_bar", "--mobility"]);
    let js = acmkin(&["catalog", "rigid_bar", "--mobility", "--json"]);
    assert_eq!(text.status.code(), js.status.code());
    assert!(serde_json::from_slice::<Value>(&text.stdout).is_err());
    assert!(json(&js).is_object());
}
