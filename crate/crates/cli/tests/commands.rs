use std::path::PathBuf;
use std::process::{Command, Output};

use indexmap::IndexMap;
use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

use impbounds_cli::{parse_document, AssessmentDocument};

const THREE_ATOMS: &str =
    r#"{"atoms": ["w1","w2","w3"], "gambles": {"X": [-1,1,2]}, "lower": {"X": 0.75}, "upper": {}}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn impbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_impbounds"))
        .args(args)
        .output()
        .unwrap()
}

fn report(o: &Output) -> Value {
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "one JSON object per command: {text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    v
}

fn three_atoms() -> (TempDir, String) {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "three_atoms.json", THREE_ATOMS);
    (dir, p.to_str().unwrap().to_string())
}

#[test]
fn check_coherence_passes() {
    let (_d, f) = three_atoms();
    let o = impbounds(&["check", "--level", "coherence", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["verdict"], "pass");
    assert!(!o.stderr.is_empty());
}

#[test]
fn extend_square_is_one() {
    let (_d, f) = three_atoms();
    let o = impbounds(&["extend", &f, "--expr", "X^2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = report(&o)["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-9);
    let o = impbounds(&["extend", &f, "--expr", "X^2", "--max"]);
    assert!((report(&o)["value"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn cantelli_three_sigma_is_one_tenth() {
    let (_d, f) = three_atoms();
    let o = impbounds(&[
        "bound",
        "cantelli",
        &f,
        "--x",
        "X",
        "--c",
        "0.75",
        "--eps",
        "auto3sigma",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let b = report(&o)["bounds"][0]["bound"].as_f64().unwrap();
    assert!((b - 0.1).abs() < 1e-12);
}

fn bounds_for(v: &Value, rule: &str) -> Vec<f64> {
    v["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|b| b["fired"] == rule)
        .filter_map(|b| b["bound"].as_f64())
        .collect()
}

#[test]
fn triple_point_from_the_command_line() {
    let (_d, f) = three_atoms();
    let plain = report(&impbounds(&["bound", "jensen", &f, "--x", "X", "--f", "square"]));
    assert!(bounds_for(&plain, "precise")
        .iter()
        .chain(bounds_for(&plain, "convex-lower-at-lower").iter())
        .any(|b| (b - 0.5625).abs() < 1e-9));
    let improved = report(&impbounds(&[
        "bound",
        "improved-jensen",
        &f,
        "--x",
        "X",
        "--f",
        "square",
    ]));
    let best = bounds_for(&improved, "improved-lower");
    assert!((best[0] - 1.0).abs() < 1e-9, "{improved}");
}

#[test]
fn verify_certifies_its_own_reports() {
    let (dir, f) = three_atoms();
    for args in [
        vec!["bound", "improved-jensen", &f, "--x", "X", "--f", "square"],
        vec!["bound", "cantelli-coh", &f, "--x", "X", "--eps", "1"],
        vec!["bound", "chebyshev", &f, "--x", "X", "--b", "1.5"],
    ] {
        let o = impbounds(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let r = write(&dir, "report.json", std::str::from_utf8(&o.stdout).unwrap());
        let o = impbounds(&["verify", &f, "--report", r.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn verify_rejects_a_corrupted_bound() {
    let (dir, f) = three_atoms();
    let bad = r#"{"bounds": [{"target": {"quantity": "lower", "of": "X^2", "values": [1,1,4]}, "direction": ">=", "bound": 1.5}]}"#;
    let r = write(&dir, "bad.json", bad);
    let o = impbounds(&["verify", &f, "--report", r.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report(&o)["verdict"], "fail");
}

#[test]
fn markov_variance_and_compare() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "nonneg.json",
        r#"{"atoms": ["a","b","c"], "gambles": {"X": [0,2,6]}, "lower": {"X": 1.0}, "upper": {"X": 3.0}}"#,
    );
    let f = f.to_str().unwrap();
    let m = report(&impbounds(&["bound", "markov", f, "--x", "X", "--a", "4"]));
    assert_eq!(m["bounds"].as_array().unwrap().len(), 2);
    let v = report(&impbounds(&["variance", f, "--x", "X"]));
    let (lv, uv) = (
        v["variance"]["lower_variance"].as_f64().unwrap(),
        v["variance"]["upper_variance"].as_f64().unwrap(),
    );
    assert!(0.0 <= lv && lv <= uv);
    let c = impbounds(&["compare", f, "--x", "X", "--eps", "2"]);
    assert_eq!(c.status.code(), Some(0));
    assert!(report(&c)["comparison"]["eps2"].as_f64().is_some());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let (_d, f) = three_atoms();

    let o = impbounds(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(impbounds(&["frobnicate"]).status.code(), Some(2));

    let o = impbounds(&["extend", &f, "--expr", "X +"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report(&o)["error"]["kind"], "expression");
    let o = impbounds(&["extend", &f, "--expr", "Y"]);
    assert_eq!(report(&o)["error"]["kind"], "unknown-identifier");

    let bad = write(
        &dir,
        "bad.json",
        r#"{"atoms": ["a"], "gambles": {"X": [1, 2]}, "lower": {}}"#,
    );
    let o = impbounds(&["check", "--level", "asl", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report(&o)["error"]["kind"], "dimension");

    let sure_loss = write(
        &dir,
        "loss.json",
        r#"{"atoms": ["a","b"], "gambles": {"X": [0,1]}, "lower": {"X": 0.8}, "upper": {"X": 0.2}}"#,
    );
    let s = sure_loss.to_str().unwrap();
    let o = impbounds(&["check", "--level", "asl", s]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report(&o)["verdict"], "fail");
    let o = impbounds(&["extend", s, "--expr", "X"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(report(&o)["error"]["kind"], "infeasible");

    let o = impbounds(&["bound", "cantelli", &f, "--x", "X", "--c", "5", "--eps", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn floats_are_bit_faithful() {
    let dir = TempDir::new().unwrap();
    let x = [0.1, 1.0 / 3.0, std::f64::consts::PI];
    let text = format!(
        r#"{{"atoms": ["a","b","c"], "gambles": {{"X": [{:?}, {:?}, {:?}]}}, "lower": {{}}}}"#,
        x[0], x[1], x[2]
    );
    let f = write(&dir, "f.json", &text);
    let o = impbounds(&["extend", f.to_str().unwrap(), "--expr", "X"]);
    let raw = String::from_utf8(o.stdout).unwrap();
    let v: Value = serde_json::from_str(&raw).unwrap();
    for (got, want) in v["gamble"].as_array().unwrap().iter().zip(x) {
        assert_eq!(got.as_f64().unwrap().to_bits(), want.to_bits());
    }
    assert!(raw.contains("3.3333333333333331e-1"), "{raw}");
}

fn document() -> impl Strategy<Value = AssessmentDocument> {
    (1usize..6, 0usize..4).prop_flat_map(|(n, k)| {
        let gambles = prop::collection::vec(prop::collection::vec(-1e6f64..1e6, n), k);
        let lowers = prop::collection::vec(prop::option::of(-1e6f64..1e6), k);
        let uppers = prop::collection::vec(prop::option::of(-1e6f64..1e6), k);
        (gambles, lowers, uppers).prop_map(move |(gs, ls, us)| {
            let mut d = AssessmentDocument {
                atoms: (0..n).map(|i| format!("w{i}")).collect(),
                gambles: IndexMap::new(),
                lower: IndexMap::new(),
                upper: IndexMap::new(),
            };
            for (i, g) in gs.into_iter().enumerate() {
                let name = format!("G{i}");
                if let Some(l) = ls[i] {
                    d.lower.insert(name.clone(), l);
                }
                if let Some(u) = us[i] {
                    d.upper.insert(name.clone(), u);
                }
                d.gambles.insert(name, g);
            }
            d
        })
    })
}

proptest! {
    #[test]
    fn documents_round_trip(d in document()) {
        let text = serde_json::to_string(&d).unwrap();
        let back = parse_document(text.as_bytes()).unwrap();
        prop_assert_eq!(back, d);
    }
}
