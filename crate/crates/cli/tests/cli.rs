use std::process::Command;

fn tfweyl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tfweyl"))
}

#[test]
fn sweep_writes_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, "seed = 5\nlambda_grid = { min = 0.001, max = 1000.0, points = 31 }\n").unwrap();
    let status = tfweyl().args(["sweep-ratio", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).status().unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep-ratio.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["config"]["seed"], 5);
    let rows = std::fs::read_to_string(dir.path().join("sweep_ratio.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 6 * 31);
}

#[test]
fn stft_check_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let status = tfweyl().args(["stft-check", "--seed", "11", "--out"]).arg(dir.path()).status().unwrap();
    assert!(status.success());
    assert!(dir.path().join("stft-check.json").exists());
}

#[test]
fn bad_configuration_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "schema_version = 9\n").unwrap();
    let out = tfweyl().args(["counterexample", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema version"));
}
