use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn pqgrowth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqgrowth")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn exponents_from_flags_prints_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = pqgrowth(&["exponents", "--p", "2", "--q", "2.4", "--n", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["threshold"], 1.5);
    assert_eq!(v["class"], "regular");
}

#[test]
fn missing_field_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"experiment": "exponents", "profile": {"q": 2, "n": 2}}"#);
    let o = pqgrowth(&["exponents", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains('p'));
}

#[test]
fn unsupported_version_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"version": 99, "experiment": "exponents", "profile": {"p": 2, "q": 2, "n": 2, "r": "inf", "s": "inf"}}"#,
    );
    let o = pqgrowth(&["exponents", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn subcommand_must_match_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"experiment": "exponents", "profile": {"p": 2, "q": 2, "n": 2, "r": "inf", "s": "inf"}}"#,
    );
    let o = pqgrowth(&["solve", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn irregular_profile_exits_with_violation_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cfg = write_config(
        tmp.path(),
        r#"{"experiment": "moser", "density": {"family": "power_weight", "p": 2, "a": {"kind": "constant", "value": 1}},
            "profile": {"p": 2, "q": 4, "n": 1, "r": "inf", "s": "inf"},
            "grid": {"dim": 1, "n_nodes": 17}, "boundary": [{"offset": 0.5, "slope": [0.5]}]}"#,
    );
    let o = pqgrowth(&["moser", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v = read_json(&out.join("violation.json"));
    assert!(v["assumption_violated"].is_string());
    assert_eq!(read_json(&out.join("manifest.json"))["exit_code"], 2);
}

#[test]
fn counterexample_refinement_factors_approach_sqrt_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cfg = write_config(
        tmp.path(),
        r#"{"experiment": "counterexample", "oracle": {"alpha": 0.5, "p": 2},
            "profile": {"p": 2, "q": 2, "n": 1, "r": 1.5, "s": 1.5},
            "refinements": [257, 513, 1025]}"#,
    );
    let o = pqgrowth(&["counterexample", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("refinement.csv")).unwrap();
    let factors: Vec<f64> = csv
        .lines()
        .skip(1)
        .filter_map(|l| l.split(',').nth(2).and_then(|f| f.parse().ok()))
        .collect();
    assert_eq!(factors.len(), 2);
    for f in factors {
        assert!((f / 2f64.sqrt() - 1.0).abs() < 0.05, "factor {f}");
    }
    let report = read_json(&out.join("counterexample.json"));
    assert_eq!(report["predicted_rate"], 0.5);
    assert_eq!(report["window"]["window_nonempty"], true);
}

#[test]
fn manifest_hashes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let text = r#"{"experiment": "oracle-compare", "oracle": {"alpha": 0.5, "p": 2},
                   "grid": {"dim": 1, "n_nodes": 65}}"#;
    let cfg = write_config(tmp.path(), text);
    let o = pqgrowth(&["oracle-compare", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["config_sha256"], hex::encode(Sha256::digest(text.as_bytes())));
    assert_eq!(m["experiment"], "oracle-compare");
    let files = m["files"].as_array().unwrap();
    assert!(!files.is_empty());
    let mut listed: Vec<String> = files.iter().map(|f| f["path"].as_str().unwrap().to_string()).collect();
    for f in files {
        let data = std::fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&data)));
        assert_eq!(f["bytes"].as_u64().unwrap(), data.len() as u64);
    }
    let mut on_disk: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    listed.sort();
    on_disk.sort();
    assert_eq!(listed, on_disk);
}
