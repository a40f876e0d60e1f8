use std::path::Path;
use std::process::{Command, Output};

fn orca(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orca")).arg("--out").arg(out).args(args).output().unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const SHORT_COUNTS: &[&str] = &["counts", "--duration", "0.02", "--mu", "0.05"];

#[test]
fn same_seed_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = orca(&[&["--seed", "9"], SHORT_COUNTS].concat(), d.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<String> =
        std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert!(names.contains(&"stream_MEM.txt".to_string()) && names.contains(&"g11_series.csv".to_string()));
    for n in &names {
        assert_eq!(read(a.path(), n), read(b.path(), n), "{n} differs");
    }
    let c = tempfile::tempdir().unwrap();
    assert!(orca(&[&["--seed", "10"], SHORT_COUNTS].concat(), c.path()).status.success());
    assert_ne!(read(a.path(), "stream_SIG.txt"), read(c.path(), "stream_SIG.txt"));
}

#[test]
fn outputs_carry_version_and_config_hash() {
    let d = tempfile::tempdir().unwrap();
    assert!(orca(SHORT_COUNTS, d.path()).status.success());
    let json: serde_json::Value = serde_json::from_slice(&read(d.path(), "counts.json")).unwrap();
    let hash = json["config_sha256"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    assert_eq!(json["orca_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(json["config"]["source"]["mu"], 0.05);
    for f in ["g2h.csv", "g11_series.csv", "coincidences_MEM.csv", "arrivals_SIG.csv"] {
        let text = String::from_utf8(read(d.path(), f)).unwrap();
        assert!(text.lines().next().unwrap().ends_with(&hash), "{f}");
    }
    let stream = String::from_utf8(read(d.path(), "stream_CTRL.txt")).unwrap();
    assert!(stream.starts_with("## orca") && stream.lines().next().unwrap().ends_with(&hash));
    let parsed = photonstats::EventStream::read_from(stream.as_bytes()).unwrap();
    assert_eq!(parsed.config, photonstats::Configuration::Ctrl);
}

#[test]
fn json_format_embeds_tables() {
    let d = tempfile::tempdir().unwrap();
    let o = orca(&["--format", "json", "absorption"], d.path());
    assert!(o.status.success());
    assert!(!d.path().join("absorption.csv").exists());
    let json: serde_json::Value = serde_json::from_slice(&read(d.path(), "absorption.json")).unwrap();
    assert_eq!(json["spectrum"].as_array().unwrap().len(), 600);
    assert!((json["fitted_temperature_k"].as_f64().unwrap() - 364.15).abs() < 0.1);
    assert!(json["signal_transmission"].as_f64().unwrap() > 0.95);
}

#[test]
fn zero_pairs_report_undefined_estimators() {
    let d = tempfile::tempdir().unwrap();
    let o = orca(&["counts", "--mu", "0", "--duration", "0.01", "--no-streams"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("undefined"));
    assert!(!d.path().join("stream_SIG.txt").exists());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.toml");
    std::fs::write(&bad, "duration_s = -1\n").unwrap();
    let o = orca(&["--config", bad.to_str().unwrap(), "counts"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(orca(&["counts", "--memory-noise", "pink:1"], d.path()).status.code(), Some(2));
    assert_eq!(orca(&["--config", "/nonexistent.toml", "absorption"], d.path()).status.code(), Some(2));
    // a storage-time axis too short to reach 1/e is a numerical failure
    let o = orca(&["lifetime", "--pumped", "--taus-ns", "0,1"], d.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn shipped_presets_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for f in ["cs-calibrated", "fig2b", "fig2c", "figA1", "figA2"] {
        mbsolver::RunConfig::from_file(&dir.join(format!("{f}.toml"))).unwrap_or_else(|e| panic!("{f}: {e}"));
    }
    for f in ["fig3", "tableA1"] {
        orca::counts::resolve(Some(&dir.join(format!("{f}.toml"))), &Default::default()).unwrap();
    }
    orca::absorption::resolve(Some(&dir.join("absorption.toml")), &Default::default()).unwrap();
}
