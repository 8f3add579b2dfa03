use std::path::Path;
use std::process::Command;

fn ensbf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ensbf"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_FILTER: &str = r#"{
  "model": {"kind": "sine"},
  "filters": [
    {"method": "ensbf", "params": {"ensemble_size": 20, "euler_steps": 10}},
    {"method": "pf", "params": {"ensemble_size": 20}},
    {"method": "enkf", "params": {"ensemble_size": 20}}
  ],
  "steps": 5,
  "repeats": 2
}"#;

#[test]
fn filter_writes_identical_outputs_for_identical_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "filter.json", SMALL_FILTER);
    for run in ["a", "b"] {
        let status = ensbf()
            .args(["filter", "--seed", "7", "--threads", "1", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path().join(run))
            .status()
            .unwrap();
        assert!(status.success());
    }
    for f in [
        "rmse.csv",
        "smoothed_rmse.csv",
        "estimates.csv",
        "summary.csv",
        "truth/repeat_001.csv",
    ] {
        let a = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("a/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["seed"], 7);
    assert_eq!(manifest["config"]["model"]["alpha"], 2.5);
}

#[test]
fn bad_configs_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.json", r#"{"stepz": 4}"#);
    let out = ensbf()
        .arg("filter")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stepz"));
    let out = ensbf()
        .args(["filter", "--config", "/nonexistent.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diverging_repeats_give_exit_code_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "div.json",
        r#"{"model": {"kind": "linear_gaussian", "a": [1e200], "q": [1], "c": [1], "r": [1]},
            "filters": [{"method": "pf", "params": {"ensemble_size": 8}}], "steps": 3}"#,
    );
    let status = ensbf()
        .arg("filter")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("o"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn verify_identity_passes_with_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let status = ensbf()
        .arg("verify-identity")
        .arg("--out")
        .arg(tmp.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("identity.json")).unwrap())
            .unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn generate_sweep_and_posterior_test_run() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = write(
        tmp.path(),
        "gen.json",
        r#"{"dataset": {"kind": "two_moons", "count": 100, "noise": 0.05}, "samples": 30, "euler_steps": 32}"#,
    );
    let status = ensbf()
        .arg("generate")
        .arg("--config")
        .arg(&gen)
        .arg("--out")
        .arg(tmp.path().join("g"))
        .status()
        .unwrap();
    assert!(status.success());
    let samples = std::fs::read_to_string(tmp.path().join("g/samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 31);
    assert!(samples.starts_with("x_1,x_2"));

    let sweep = write(
        tmp.path(),
        "sweep.json",
        r#"{"experiment": {"filters": [{"method": "ensbf", "params": {"ensemble_size": 10}}], "steps": 4, "repeats": 2},
            "axis": "euler_steps", "values": [4, 8]}"#,
    );
    let status = ensbf()
        .arg("sweep")
        .arg("--config")
        .arg(&sweep)
        .arg("--out")
        .arg(tmp.path().join("s"))
        .status()
        .unwrap();
    assert!(status.success());
    let table = std::fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    assert_eq!(
        table.lines().next().unwrap(),
        "filter,axis_value,mean,stderr"
    );
    assert_eq!(table.lines().count(), 3);

    let post = write(
        tmp.path(),
        "post.json",
        r#"{"params": {"ensemble_size": 100, "euler_steps": 10}, "exact_samples": 100, "repeats": 2}"#,
    );
    let status = ensbf()
        .arg("posterior-test")
        .arg("--config")
        .arg(&post)
        .arg("--out")
        .arg(tmp.path().join("p"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(tmp.path().join("p/posterior_test.json").exists());
    assert!(tmp.path().join("p/exact.csv").exists());
}
