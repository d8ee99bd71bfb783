use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn quaddr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quaddr")).args(args).env_remove("QUADDR_CACHE_DIR").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn run(cmd: &str, file: &str, extra: &[&str]) -> Output {
    let path = model(file);
    let mut args = vec![cmd, "--model", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    quaddr(&args)
}

fn dims(v: &Value) -> Vec<u64> {
    v["dims"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
}

#[test]
fn validate_passes_on_the_classifying_stack() {
    let out = run("validate", "bgm.toml", &["--max-degree", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["witnesses"].as_array().unwrap().is_empty());
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert!(checks.iter().any(|c| c["identity"] == "(φ+∂+d+ι)² = 0" && c["checked"].as_u64().unwrap() > 0));
}

#[test]
fn cohomology_of_the_classifying_stack() {
    let out = run("cohomology", "bgm.toml", &["--max-degree", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(dims(&v), vec![1, 0, 1, 0, 1, 0, 1]);
    assert_eq!(v["degrees"].as_array().unwrap().len(), 7);
    assert_eq!(v["stabilized"], true);
}

#[test]
fn corrupted_sign_override_yields_a_witness() {
    let out = run("cohomology", "bgm.toml", &["--max-degree", "3", "--unsafe-sign-override", r#"{"omega_first": -1}"#]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let ws = v["witnesses"].as_array().unwrap();
    assert!(ws.iter().any(|w| w["message"].as_str().unwrap().starts_with("[∂,ι] = −𝔏 violated at n=1")), "{ws:?}");
    assert!(ws.iter().all(|w| w["identity"].is_string() && w["detail"].is_string()));
}

#[test]
fn override_changes_the_fingerprint() {
    let plain = json(&run("cohomology", "bgm.toml", &["--max-degree", "1"]));
    let bent =
        json(&run("cohomology", "bgm.toml", &["--max-degree", "1", "--unsafe-sign-override", r#"{"cech": -1}"#]));
    assert_ne!(plain["model_hash"], bent["model_hash"]);
}

#[test]
fn reports_are_byte_deterministic() {
    let a = run("pages", "a1-mod-gm.toml", &["--max-degree", "4", "--r", "2"]);
    let b = run("pages", "a1-mod-gm.toml", &["--max-degree", "4", "--r", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_config_exits_two_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "family = \"transformation\"\ncolour = 3\n").unwrap();
    let out = quaddr(&["cohomology", "--model", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["witnesses"][0]["identity"], "configuration");
}

#[test]
fn additive_cartan_is_refused() {
    let out = run("cartan", "line-bundle-a1.toml", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["witnesses"][0]["identity"], "refused");
}

#[test]
fn options_table_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.toml");
    let text = std::fs::read_to_string(model("bgm.toml")).unwrap() + "\n[options]\nmax_degree = 2\nformat = \"csv\"\n";
    std::fs::write(&path, text).unwrap();
    let out = quaddr(&["cohomology", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "table,degree,dim\ndims,0,1\ndims,1,0\ndims,2,1\n");
}

#[test]
fn fixed_p_pages_of_the_classifying_stack() {
    let v = json(&run("fixed-p", "bgm.toml", &["--max-degree", "3", "--p", "1"]));
    assert_eq!(dims(&v), vec![0, 1, 0, 0]);
    assert!(v["pages"]["E1"].is_array());
}

#[test]
fn inclusion_of_the_origin_is_a_quasi_isomorphism() {
    let m = model("bgm-to-a1-mod-gm.toml");
    let out = quaddr(&["natural", "--morphism", m.to_str().unwrap(), "--max-degree", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["induced"]["isomorphism"], true);
    assert_eq!(dims(&v), vec![1, 0, 1, 0, 1]);
}

fn save(dir: &tempfile::TempDir, name: &str, out: &Output) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn identical_reports_compare_equal() {
    let dir = tempfile::tempdir().unwrap();
    let a = save(&dir, "a.json", &run("cohomology", "bgm.toml", &["--max-degree", "2"]));
    let out = quaddr(&["compare", &a, &a]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["dims"].as_array().unwrap().is_empty());
    assert!(v["pages"].as_array().unwrap().is_empty());
}

#[test]
fn total_and_oracle_agree_on_the_point_quotient() {
    let dir = tempfile::tempdir().unwrap();
    let a = save(&dir, "k.json", &run("cohomology", "gm-mod-gm.toml", &["--max-degree", "3"]));
    let b = save(&dir, "o.json", &run("oracle", "gm-mod-gm.toml", &["--max-degree", "3"]));
    let out = quaddr(&["compare", &a, &b]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["dims"].as_array().unwrap().is_empty());
}

#[test]
fn first_page_differential_vanishes_on_the_classifying_stack() {
    let dir = tempfile::tempdir().unwrap();
    let a = save(&dir, "r1.json", &run("pages", "bgm.toml", &["--max-degree", "4", "--r", "1"]));
    let b = save(&dir, "r2.json", &run("pages", "bgm.toml", &["--max-degree", "4", "--r", "2"]));
    let out = quaddr(&["compare", &a, &b]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["pages"].as_array().unwrap().is_empty());
    assert!(v["vanishing_differentials"].as_array().unwrap().iter().any(|p| p == "E1"));
    assert_eq!(v["unmatched_pages"], serde_json::json!(["E2"]));
}

#[test]
fn differing_and_incompatible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let a = save(&dir, "a.json", &run("cohomology", "bgm.toml", &["--max-degree", "2"]));
    let b = save(&dir, "b.json", &run("cohomology", "gm-mod-gm.toml", &["--max-degree", "2"]));
    let c = save(&dir, "c.json", &run("cohomology", "bgm.toml", &["--max-degree", "3"]));
    let out = quaddr(&["compare", &a, &b]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["dims"], serde_json::json!([{ "degree": 2, "a": 1, "b": 0 }]));
    assert!(!json(&out)["witnesses"].as_array().unwrap().is_empty());
    let out = quaddr(&["compare", &a, &c]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["witnesses"][0]["identity"], "comparable ranges");
}

#[test]
fn cache_returns_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = model("gm-mod-z2.toml");
    let go = || {
        Command::new(env!("CARGO_BIN_EXE_quaddr"))
            .args(["cohomology", "--model", path.to_str().unwrap(), "--max-degree", "2"])
            .env("QUADDR_CACHE_DIR", dir.path())
            .output()
            .unwrap()
    };
    let first = go();
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    assert_eq!(first.stdout, go().stdout);
}
