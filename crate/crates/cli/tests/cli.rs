use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn fixture(name: &str) -> String {
    root().join("../core/fixtures").join(format!("{name}.json")).display().to_string()
}

fn tlae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlae")).args(args).env_remove("TLAE_CONFIG").output().unwrap()
}

fn golden(name: &str, out: &Output) {
    let want = std::fs::read_to_string(root().join("tests/golden").join(name)).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), want, "{name}");
}

#[test]
fn validate_figure_four() {
    let out = tlae(&["validate", &fixture("fig4")]);
    assert_eq!(out.status.code(), Some(0));
    golden("validate_fig4.json", &out);
}

#[test]
fn analyze_figure_four() {
    let f = fixture("fig4");
    let args = ["analyze", &f, "w6", "--agent", "a1", "--goal", "p1", "--ratio-min", "3/4", "--candidate", "d1", "--candidate", "d2"];
    let out = tlae(&args);
    assert_eq!(out.status.code(), Some(0));
    golden("analyze_fig4.json", &out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["good"], serde_json::json!(["d2@a1"]));
    // Same bytes on a second run.
    assert_eq!(tlae(&args).stdout, out.stdout);
}

#[test]
fn analyze_hasse_diagram() {
    let out = tlae(&["analyze", &fixture("fig4"), "w6", "--goal", "p1", "--dot"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("digraph"));
}

#[test]
fn sat_exit_codes() {
    let out = tlae(&["sat", "p1 & ~p1"]);
    assert_eq!(out.status.code(), Some(1));
    golden("sat_unsat.json", &out);
    let dir = std::env::temp_dir().join(format!("tlae-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("witness.json");
    let out = tlae(&["sat", "<>p1 & <>~p1", "--emit-model", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let check = tlae(&["validate", model.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
    let deep = tlae(&["sat", "<P><P><P>p1", "--bound-depth", "2"]);
    assert_eq!(deep.status.code(), Some(3));
}

#[test]
fn check_and_closure() {
    let out = tlae(&["check", &fixture("fig3"), "w4", "[A](dw1@a1 -> p1)"]);
    assert_eq!(out.status.code(), Some(1));
    golden("check_fig3.json", &out);
    let out = tlae(&["check", &fixture("fig3"), "w4", "would-ex(d1@a1, p1)"]);
    assert_eq!(out.status.code(), Some(0));
    let out = tlae(&["closure", "<>e@a1", "--format", "text"]);
    golden("closure.txt", &out);
    let out = tlae(&["export-dot", &fixture("fig1_produce")]);
    golden("fig1_produce.dot", &out);
}

#[test]
fn usage_errors() {
    assert_eq!(tlae(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tlae(&["sat", "p1 &"]).status.code(), Some(2));
    assert_eq!(tlae(&["check", &fixture("fig3"), "w99", "p1"]).status.code(), Some(2));
    assert_eq!(tlae(&["validate", "/nonexistent.json"]).status.code(), Some(2));
    let out = tlae(&["analyze", &fixture("fig4"), "w6", "--goal", "p1", "--ratio-min", "0.75"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&tlae(&["sat", "p1 &"]).stderr).to_string();
    assert!(err.contains("1:5"), "{err}");
}

#[test]
fn config_from_file_and_environment() {
    let dir = std::env::temp_dir().join(format!("tlae-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("session.toml");
    std::fs::write(&cfg, "agents = [\"a1\", \"a2\"]\nformat = \"text\"\n").unwrap();
    let out = tlae(&["--config", cfg.to_str().unwrap(), "sat", "<>dw1@a1 & <>dw1@a2 & [](dw1@a1 -> ~dw1@a2)"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "unsat");
    let out = Command::new(env!("CARGO_BIN_EXE_tlae")).args(["closure", "p1"]).env("TLAE_CONFIG", &cfg).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("e@a2"));
    std::fs::write(&cfg, "actions = [\"d1\", \"d1\"]\n").unwrap();
    assert_eq!(tlae(&["--config", cfg.to_str().unwrap(), "closure", "p1"]).status.code(), Some(2));
}
