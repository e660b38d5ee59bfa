use std::fs;
use std::path::PathBuf;

use bellsim::cli::run_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bellsim").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bellsim-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn confidence_table_for_one_photon() {
    let (code, out, _) = run(&["confidence", "--n", "1"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("a,b,q\n"));
    assert!(out.lines().any(|l| l == "1,0,3"));
    assert!(out.lines().any(|l| l == "2,0,-3"));
}

#[test]
fn confidence_table_for_two_photons() {
    let (code, out, _) = run(&["confidence", "--n", "2"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "0,1,2.33333333333333"), "{out}");
}

#[test]
fn ideal_counters_give_unit_confidence() {
    let (code, out, _) = run(&["confidence", "--n", "2", "--eta", "1", "--nu", "0"]);
    assert_eq!(code, 0);
    let curve = out.split("\n\n").nth(1).unwrap();
    let row = curve.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[2], "1");
    assert_eq!(cols[3], "1");
}

#[test]
fn confidence_json_output() {
    let dir = std::env::temp_dir().join(format!("bellsim-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("c1.json");
    let (code, _, _) = run(&["confidence", "--n", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v.is_object() || v.is_array());
}

#[test]
fn unsupported_number_sum() {
    let (code, _, err) = run(&["confidence", "--n", "3"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
}

#[test]
fn bad_order_is_rejected() {
    let (code, _, _) = run(&["confidence", "--n", "1", "--order", "4"]);
    assert_eq!(code, 2);
}

#[test]
fn scissors_scenario() {
    let p = scratch("sc.json", r#"{"manipulation": "scissors", "n": 1, "alpha": 1.7320508075688772}"#);
    let (code, out, _) = run(&["fidelity", "--scenario", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    let row = out.lines().find(|l| l.starts_with("1,0,")).unwrap();
    let f: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((f - 0.5625).abs() < 1e-9);
}

#[test]
fn malformed_scenarios_are_rejected() {
    let unknown = scratch("bad1.json", r#"{"manipulation": "scissors", "n": 1, "alpha": 1.0, "colour": 3}"#);
    let broken = scratch("bad2.json", "{ not json");
    let kind = scratch("bad3.json", r#"{"manipulation": "juggle", "n": 1}"#);
    for p in [unknown, broken, kind] {
        let (code, _, err) = run(&["fidelity", "--scenario", p.to_str().unwrap()]);
        assert_eq!(code, 2, "{}", p.display());
        assert!(!err.is_empty());
    }
    let (code, _, _) = run(&["fidelity", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(code, 2);
}

#[test]
fn decompose_builtin() {
    let (code, out, _) = run(&["decompose", "--n", "2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["modes"], 3);
}

#[test]
fn sweep_rows() {
    let (code, out, _) = run(&["sweep", "--n", "1", "--steps", "5", "--nu", "0"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 6);
}

#[test]
fn verify_reports_every_check() {
    let (code, out, _) = run(&["verify"]);
    assert!(code == 0 || code == 3);
    assert!(out.contains("PASS"));
    if code == 3 {
        assert!(out.contains("FAIL"));
    }
}
