//! The command-line front end, run as a subprocess.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fulfillment-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FULFILLMENT_LAB_CACHE")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(dir: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{command}.json"))).expect("report written");
    serde_json::from_str(&text).expect("report is JSON")
}

#[test]
fn fulfill_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let seg = ["--segments", "2,5,26"];
    let o = lab(&[&["fulfill", "--formula", "q1"][..], &seg].concat(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(dir.path(), "fulfill")["outcome"], "true");

    let o = lab(&[&["fulfill", "--formula", "exists x. !(x = x)"][..], &seg].concat(), dir.path());
    assert_eq!(code(&o), 1);

    let o = lab(
        &["fulfill", "--segments", "2,5,26,677", "--formula", "forall y. forall z. x = x", "--assign", "x=100"],
        dir.path(),
    );
    assert_eq!(code(&o), 3);

    let o = lab(&[&["fulfill", "--formula", "exists x. ("][..], &seg].concat(), dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn qcheck_rejects_a_sequence_that_is_not_square_increasing() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&lab(&["qcheck", "--segments", "2,5,26"], dir.path())), 0);
    assert_eq!(code(&lab(&["qcheck", "--segments", "2,4"], dir.path())), 2);
}

#[test]
fn collapse_of_a_constant_chain_writes_its_result() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("sig.json");
    std::fs::write(&sig, r#"{"relations": [{"name": "P", "arity": 1}], "constants": ["c"]}"#).unwrap();
    let level = r#"{"domain": [0], "constants": {"c": 0}, "relations": {"P": [[0]]}}"#;
    let chain = dir.path().join("chain.json");
    std::fs::write(&chain, format!("[{level}, {level}, {level}]")).unwrap();
    let args = ["collapse", "--sig", sig.to_str().unwrap(), "--chain", chain.to_str().unwrap()];

    let o = lab(&[&args[..], &["--formula", "exists x. P(x)"]].concat(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("collapse_result.json").exists());
    let checks = report(dir.path(), "collapse")["checks"].as_array().cloned().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["passed"] == true));

    // depth 2 leaves no room in a chain of three levels
    let o = lab(&[&args[..], &["--formula", "exists x. exists y. P(x) & P(y)"]].concat(), dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn caps_exit_with_their_own_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&lab(&["ph", "--e", "2", "--k", "6", "--r", "2", "--cap", "10"], dir.path())), 4);
    assert_eq!(code(&lab(&["enumerate", "--n", "2", "--universe", "3", "--cap", "5"], dir.path())), 4);
}

#[test]
fn probe_and_enumerate_report_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["probe", "--formula", "forall x. x = x"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(report(dir.path(), "probe")["stats"]["chains"], 28);

    let o = lab(&["enumerate", "--n", "3"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("12"));
}

#[test]
fn a_cached_report_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_fulfillment-lab"))
            .args(["qcheck", "--segments", "2,5,26", "--out"])
            .arg(out)
            .env("FULFILLMENT_LAB_CACHE", &cache)
            .output()
            .unwrap()
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run(&a)), 0);
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(code(&run(&b)), 0);
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(std::fs::read(a.join("qcheck.json")).unwrap(), std::fs::read(b.join("qcheck.json")).unwrap());
}
