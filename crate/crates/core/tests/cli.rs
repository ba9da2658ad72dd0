use std::fs;
use std::path::{Path, PathBuf};
use std::process::Output;

use sha2::{Digest, Sha256};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(sub: &str, cfg: &Path, out: &Path) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_nematic-homog"))
        .args([sub, cfg.to_str().unwrap()])
        .env("NEMATIC_HOMOG_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn manifest_digests_match_the_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("design", &config("design.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(dir.path());
    assert_eq!(m["exit_code"], 0);
    let outputs = m["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|f| f["file"] == "design.csv"));
    for f in outputs {
        let bytes = fs::read(dir.path().join(f["file"].as_str().unwrap())).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"].as_str().unwrap(), hex);
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
}

#[test]
fn identical_configs_give_identical_outputs() {
    for (sub, name) in [("design", "design.toml"), ("identities", "identities.toml"), ("probe", "probe_lemma35.toml")] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(run(sub, &config(name), a.path()).status.code(), Some(0), "{name}");
        assert_eq!(run(sub, &config(name), b.path()).status.code(), Some(0), "{name}");
        let (ma, mb) = (manifest(a.path()), manifest(b.path()));
        assert_eq!(ma["outputs"], mb["outputs"], "{name}");
        for f in ma["outputs"].as_array().unwrap() {
            let file = f["file"].as_str().unwrap();
            assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap());
        }
    }
}

#[test]
fn hypothesis_fixtures_exit_with_gate_failures() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("check", &config("check.toml"), dir.path()).status.code(), Some(0));
    for (name, flagged) in [("check_alpha_1_6.toml", "H1"), ("check_overlap.toml", "H2"), ("check_l3.toml", "H6")] {
        let o = run("check", &config(name), dir.path());
        assert_eq!(o.status.code(), Some(3), "{name}");
        assert_eq!(manifest(dir.path())["summary"][flagged], false, "{name}");
    }
}

#[test]
fn inadmissible_design_target_is_a_gate_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("design", &config("design_bad_target.toml"), dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("c > 0, c′ > 0"));
    assert_eq!(manifest(dir.path())["status"], "gate failure");
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = fs::read_to_string(config("design.toml")).unwrap();
    fs::write(&bad, format!("{text}\n[design.extra]\nbogus = 1\n")).unwrap();
    assert_eq!(run("design", &bad, dir.path()).status.code(), Some(2));
    // a config naming another command
    assert_eq!(run("check", &config("design.toml"), dir.path()).status.code(), Some(2));
    assert_eq!(run("design", &dir.path().join("missing.toml"), dir.path()).status.code(), Some(2));
}

#[test]
fn quick_converge_run_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("converge.toml");
    let text = fs::read_to_string(config("converge.toml")).unwrap().replace("eps = [0.25, 0.125]", "eps = [0.5]");
    assert!(text.contains("eps = [0.5]"));
    fs::write(&cfg, text).unwrap();
    let o = run("converge", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("experiment.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "{csv}");
}
