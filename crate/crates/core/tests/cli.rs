use std::path::Path;
use std::process::{Command, Output};

use dressed_laser::cli::output::RunManifest;

fn bin(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dressed-laser"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("DRESSED_LASER_THREADS", t);
    }
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_all_files_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("low");
    let res = bin(&["run", "preset:fig-low-pump", "--out", path(&out), "--oracle"], None);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let manifest = RunManifest::load(&out.join("manifest.json")).unwrap();
    for name in ["cavity.csv", "fluor_lower.csv", "stats.json", "ladder.json", "oracle_report.json"] {
        let bytes = std::fs::read(out.join(name)).unwrap();
        assert_eq!(manifest.files[name], dressed_laser::cli::output::sha256_hex(&bytes), "{name}");
    }
    assert_eq!(manifest.preset.as_deref(), Some("fig-low-pump"));

    let peaks = bin(&["peaks", path(&out.join("cavity.csv")), path(&out.join("ladder.json"))], None);
    assert_eq!(code(&peaks), 0, "{}", String::from_utf8_lossy(&peaks.stderr));
    let report: serde_json::Value = serde_json::from_slice(&peaks.stdout).unwrap();
    assert_eq!(report["run_id"], manifest.run_id.as_str());
}

#[test]
fn repeated_runs_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&bin(&["run", "preset:fig-rising-pump", "--out", path(&a)], Some("1"))), 0);
    assert_eq!(code(&bin(&["run", "preset:fig-rising-pump", "--out", path(&b)], Some("3"))), 0);
    for name in ["cavity.csv", "fluor_lower.csv", "stats.json", "ladder.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let (ma, mb) =
        (RunManifest::load(&a.join("manifest.json")).unwrap(), RunManifest::load(&b.join("manifest.json")).unwrap());
    assert_eq!(ma.run_id, mb.run_id);
    assert_eq!(ma.files, mb.files);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_field = write(tmp.path(), "a.json", r#"{"model": {"kapa": 0.1}}"#);
    let res = bin(&["run", &bad_field, "--out", path(&tmp.path().join("x"))], None);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("kapa"));

    let negative = write(tmp.path(), "b.json", r#"{"preset": "fig-low-pump", "model": {"kappa": -1}}"#);
    assert_eq!(code(&bin(&["run", &negative, "--out", path(&tmp.path().join("y"))], None)), 2);

    assert_eq!(code(&bin(&["run", "preset:no-such-preset"], None)), 2);
    assert_eq!(code(&bin(&["run", path(&tmp.path().join("missing.json"))], None)), 2);
    assert_eq!(code(&bin(&["run", "preset:fig-low-pump", "--out", path(&tmp.path().join("z"))], Some("zero"))), 2);

    let sweep = |axis: &str, values: &str| {
        code(&bin(
            &["sweep", "preset:fig-low-pump", "--axis", axis, "--values", values, "--out", path(&tmp.path().join("s"))],
            None,
        ))
    };
    assert_eq!(sweep("kappa", ""), 2);
    assert_eq!(sweep("kappa", "0.1,abc"), 2);
    assert_eq!(sweep("omega", "1"), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    // No cavity loss and no lower-sideband decay: the ladder never closes.
    let cfg = write(
        tmp.path(),
        "open.json",
        r#"{"preset": "fig-bandgap-high", "model": {"kappa": 0.0}, "numerics": {"cap": 64}}"#,
    );
    let res = bin(&["run", &cfg, "--out", path(&tmp.path().join("o"))], None);
    assert_eq!(code(&res), 3, "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn peaks_rejects_mixed_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&bin(&["run", "preset:fig-low-pump", "--out", path(&a)], None)), 0);
    assert_eq!(code(&bin(&["run", "preset:fig-bandgap-low", "--out", path(&b)], None)), 0);
    let res = bin(&["peaks", path(&a.join("cavity.csv")), path(&b.join("ladder.json"))], None);
    assert_eq!(code(&res), 2);

    // A spectrum edited after the run no longer matches its manifest.
    let csv = a.join("cavity.csv");
    let mut text = std::fs::read_to_string(&csv).unwrap();
    text.push_str("1.0e3,0.0\n");
    std::fs::write(&csv, text).unwrap();
    assert_eq!(code(&bin(&["peaks", path(&csv), path(&a.join("ladder.json"))], None)), 2);
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let res =
        bin(&["sweep", "preset:fig-low-pump", "--axis", "kappa", "--values", "0.05,0.1", "--out", path(&out)], None);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["partial_failure"], false);
    assert!(out.join("kappa_00").join("manifest.json").exists());
    assert!(out.join("kappa_01").join("manifest.json").exists());
}
