use std::path::PathBuf;

use serde_json::Value;
use submarket_lab::cli::{run, EXIT_ARBITRAGE, EXIT_INVALID, EXIT_OK};

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn sublab(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run(std::iter::once("sublab").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, text) = sublab(args);
    (code, serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")))
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("sublab-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn price_of_second_asset_in_first_submarket() {
    let (code, v) = json(&["price", &fixture("m2.json"), "--claim", "Stau1", "--venue", "global"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["price"], "15/4");
    assert_eq!(v["gap"], "0");
}

#[test]
fn arb_exit_codes() {
    assert_eq!(json(&["arb", &fixture("m2.json")]).0, EXIT_OK);
    let (code, v) = json(&["arb", &fixture("m1.json")]);
    assert_eq!(code, EXIT_ARBITRAGE);
    assert_eq!(v["verdict"], "arbitrage");
    let (code, v) = json(&["arb", &fixture("m1.json"), "--submarket", "tau2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verdict"], "free");
}

#[test]
fn fra_reports_rate() {
    let (code, v) = json(&["fra", "--bi", "0.97", "--bm", "0.96", "--i", "0.25", "--m", "0.5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["exact"], "1/24");
}

#[test]
fn zero_probability_names_the_atom() {
    let text = std::fs::read_to_string(fixture("m2.json")).unwrap().replace(r#""d": "1/2"}"#, r#""d": "0"}"#);
    let path = scratch("zero.json", &text);
    let (code, out) = sublab(&["validate", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, EXIT_INVALID);
    assert!(out.contains("`d`"), "{out}");
}

#[test]
fn malformed_input_is_invalid() {
    let path = scratch("bad.json", "{ not json");
    let (code, _) = sublab(&["arb", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, EXIT_INVALID);
    assert_eq!(sublab(&["price", &fixture("m2.json"), "--claim", "nope"]).0, EXIT_INVALID);
    assert_eq!(sublab(&["frobnicate"]).0, EXIT_INVALID);
}

#[test]
fn verify_and_demos() {
    let (code, v) = json(&["verify", &fixture("m2.json")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["all_hold"], true);
    for spec in ["cotrade.json", "same_payoff.json"] {
        let (code, v) = json(&["demo", "cotrade", &fixture(spec)]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(v["demonstrated"], true, "{spec}");
    }
}

#[test]
fn gen_output_loads_back() {
    let (code, text) = sublab(&["gen", "--atoms", "4", "--submarkets", "2", "--seed", "9", "--arbitrage-free"]);
    assert_eq!(code, EXIT_OK);
    let path = scratch("gen.json", &text);
    let (code, v) = json(&["arb", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verdict"], "free");
}
