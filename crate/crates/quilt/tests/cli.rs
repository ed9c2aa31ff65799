use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_quilt");

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("quilt-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str], cache: Option<&Path>) -> Output {
    let mut c = Command::new(BIN);
    c.args(args).env_remove("QUILT_CACHE_DIR");
    if let Some(d) = cache {
        c.env("QUILT_CACHE_DIR", d);
    }
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn forge_and_verify_associator() {
    let d = scratch("forge");
    let out = d.join("a.json");
    let o = run(&["forge-associator", "--degree", "3", "--out", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["report"]["ok"], true);
    assert!(v["series"]["terms"].as_object().unwrap().len() > 1);
    assert_eq!(code(&run(&["verify", out.to_str().unwrap()], None)), 0);
}

#[test]
fn degree_beyond_the_solver_is_a_solver_failure() {
    assert_eq!(code(&run(&["forge-associator", "--degree", "9"], None)), 2);
}

#[test]
fn malformed_input_exits_one() {
    let d = scratch("bad");
    let bad = d.join("bad.toml");
    std::fs::write(&bad, "dim = 2\nbasis = [\"e1\"\n").unwrap();
    let o = run(&["quantize-group", bad.to_str().unwrap()], None);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.toml"));
    assert_eq!(code(&run(&["quantize-group", "/nonexistent/b.toml"], None)), 1);
    assert_eq!(code(&run(&["quantize-group", &data("example.toml"), "--jet-order", "2"], None)), 1);
    assert_eq!(code(&run(&["verify", bad.to_str().unwrap()], None)), 1);
}

#[test]
fn output_is_independent_of_thread_count() {
    let one = run(&["--threads", "1", "quantize-module", &data("example.toml"), "--module", &data("group.toml")], None);
    let four = run(&["--threads", "4", "quantize-module", &data("example.toml"), "--module", &data("group.toml")], None);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    let v: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v["kind"], "module");
    assert_eq!(v["flags"]["cocommutative_at_hbar0"], false);
    assert_eq!(v["report"]["checks"].as_array().unwrap().len(), 12);
}

#[test]
fn abelian_group_is_cocommutative() {
    let o = run(&["quantize-group", &data("abelian.toml"), "--hbar-degree", "1", "--jet-order", "2"], None);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["flags"]["cocommutative_at_hbar0"], true);
}

#[test]
fn tampered_artifacts_fail_verification() {
    let d = scratch("tamper");
    let g = d.join("g.json");
    let o = run(&["quantize-group", &data("example.toml"), "--dump-operators", "--out", g.to_str().unwrap()], None);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(&["verify", g.to_str().unwrap()], None)), 0);

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert!(v["provenance"]["bialgebra_sha256"].as_str().unwrap().len() == 64);
    v["antipode"] = v["counit"].clone();
    let t = d.join("t.json");
    std::fs::write(&t, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["verify", t.to_str().unwrap()], None);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("antipode"));
}

#[test]
fn broken_associator_is_reported_with_a_witness() {
    let d = scratch("broken");
    let a = d.join("a.json");
    run(&["forge-associator", "--degree", "2", "--out", a.to_str().unwrap()], None);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let terms = v["series"]["terms"].as_object_mut().unwrap();
    let key = terms.keys().find(|k| !k.is_empty() && k.as_str() != "1").unwrap().clone();
    terms.insert(key, Value::String("7".into()));
    std::fs::write(&a, serde_json::to_string(&v).unwrap()).unwrap();

    let o = run(&["verify", a.to_str().unwrap()], None);
    assert_eq!(code(&o), 3);

    // Quantizing with it still writes the artifact and its witnesses.
    let g = d.join("g.json");
    let o = run(&["quantize-group", &data("example.toml"), "--phi", a.to_str().unwrap(), "--out", g.to_str().unwrap()], None);
    assert_eq!(code(&o), 3);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(v["report"]["ok"], false);
    assert!(v["report"]["checks"].as_array().unwrap().iter().any(|c| c["witness"].is_string()));
}

#[test]
fn cache_is_reused_and_repaired() {
    let d = scratch("cache");
    let plain = run(&["quantize-group", &data("example.toml")], None);
    let first = run(&["quantize-group", &data("example.toml")], Some(&d));
    let entry = d.join("associator-2-zero.json");
    assert!(entry.exists());
    let second = run(&["quantize-group", &data("example.toml")], Some(&d));
    assert_eq!(plain.stdout, first.stdout);
    assert_eq!(first.stdout, second.stdout);

    std::fs::write(&entry, "{\"kind\": \"associator\"}").unwrap();
    let third = run(&["quantize-group", &data("example.toml")], Some(&d));
    assert_eq!(code(&third), 0);
    assert_eq!(third.stdout, plain.stdout);
    let repaired: Value = serde_json::from_str(&std::fs::read_to_string(&entry).unwrap()).unwrap();
    assert_eq!(repaired["report"]["ok"], true);
}

#[test]
fn render_morphisms_and_graphs() {
    let o = run(&["render", &data("polygons.toml")], None);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("+-1b-+-2b-+-3b-+"));
    let g = run(&["render", &data("gamma_h2.toml")], None);
    let h = run(&["render", "--gamma-h", "2"], None);
    assert_eq!(code(&g), 0);
    assert_eq!(g.stdout, h.stdout);
    assert_eq!(code(&run(&["render"], None)), 1);
}
