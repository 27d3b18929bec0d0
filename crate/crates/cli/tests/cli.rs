use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fembed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fembed")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SINGLE: &str = r#"{
  "schema": 1,
  "potential": {"kind": "zero"},
  "targets": [{"k": 1.0, "n": 1, "xi": 0.3}],
  "mode": {"kind": "practical", "spacing": 20.0, "amplitudes": [4.0]},
  "run": {"x_max": 2000.0, "grid_step": 0.05, "probes": 4}
}"#;

#[test]
fn bands_of_the_free_operator_touch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema": 1, "potential": {"kind": "zero"}, "run": {"n_max": 3}}"#);
    let out = dir.path().join("o");
    let r = fembed(&["bands", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let mut rdr = csv::Reader::from_path(out.join("bands.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        let (lo, hi): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        let n = (i + 1) as f64;
        assert!((lo - ((n - 1.0) * std::f64::consts::PI).powi(2)).abs() < 1e-7);
        assert!((hi - (n * std::f64::consts::PI).powi(2)).abs() < 1e-7);
    }
}

#[test]
fn cosine_bands_have_a_first_gap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema": 1, "potential": {"kind": "cosine", "amplitude": 2.0}, "run": {"n_max": 2}}"#);
    let out = dir.path().join("o");
    assert_eq!(fembed(&["bands", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(out.join("bands.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let top: f64 = rows[0][2].parse().unwrap();
    let next: f64 = rows[1][1].parse().unwrap();
    assert!(next - top > 0.1, "{top} {next}");
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", "{\n  \"schema\": 1,\n  \"potential\": {\"kind\": \"zero\"},\n  \"run\": {\"grid_stepp\": 1}\n}");
    let r = fembed(&["bands", "--config", s(&cfg)]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("grid_stepp") && err.contains(":4:"), "{err}");

    let cfg = write_config(dir.path(), "d.json", r#"{"schema": 2, "potential": {"kind": "zero"}}"#);
    let r = fembed(&["bands", "--config", s(&cfg)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("schema"));

    let r = fembed(&["eigen", "--config", s(&dir.path().join("missing.json"))]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn eigen_on_free_background_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"schema": 1, "potential": {"kind": "zero"}, "targets": [{"k": 1.0, "n": 1, "xi": 0}, {"k": 0.5, "n": 4, "xi": 0}]}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(fembed(&["eigen", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(out.join("eigen.csv")).unwrap();
    for row in rdr.records() {
        let row = row.unwrap();
        let e: f64 = row[2].parse().unwrap();
        let a: f64 = row[3].parse().unwrap();
        assert!((e - a * a).abs() < 1e-9 * a * a);
        assert_eq!(&row[5], "true");
    }
}

#[test]
fn cross_band_group_violating_summability_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"schema": 1, "potential": {"kind": "cosine", "amplitude": 0.1},
            "targets": [{"k": 1.5707963267948966, "n": 300, "xi": 0.3}, {"k": 1.5707963267948966, "n": 600, "xi": 1.1}]}"#,
    );
    let r = fembed(&["synth", "--config", s(&cfg), "--out", s(&dir.path().join("o"))]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("sparsity"));
}

#[test]
fn synth_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SINGLE);
    let out = dir.path().join("o");
    let r = fembed(&["synth", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["potential.csv", "trajectory.json", "plan.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("plan.json")).unwrap()).unwrap();
    assert_eq!(plan["plan"]["targets"][0]["amplitude"], 4.0);

    let r = fembed(&["verify", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(rep["targets"][0]["l2_verdict"], true);
    assert_eq!(rep["probes"].as_array().unwrap().len(), 4);
    assert!(rep["probes"].as_array().unwrap().iter().all(|p| p["l2_verdict"] == false));

    // The structured export verifies the same way.
    let r = fembed(&["verify", "--config", s(&cfg), "--out", s(&dir.path().join("p")), "--potential", s(&out.join("trajectory.json"))]);
    assert_eq!(r.status.code(), Some(0));
}

#[test]
fn verify_zero_potential_rejects_everything() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SINGLE);
    let v = dir.path().join("zero.csv");
    let mut text = String::from("x,V\n");
    for i in 0..=400 {
        text.push_str(&format!("{},0\n", i as f64 * 5.0));
    }
    std::fs::write(&v, text).unwrap();
    let out = dir.path().join("o");
    let r = fembed(&["verify", "--config", s(&cfg), "--out", s(&out), "--potential", s(&v)]);
    assert_eq!(r.status.code(), Some(5));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(rep["targets"][0]["l2_verdict"], false);
    assert!(rep["probes"].as_array().unwrap().iter().all(|p| p["l2_verdict"] == false));
}

#[test]
fn corrupted_potential_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SINGLE);
    let v = dir.path().join("bad.csv");
    std::fs::write(&v, "x,V\n0,0\n1,0\n2,zz\n").unwrap();
    let r = fembed(&["verify", "--config", s(&cfg), "--potential", s(&v), "--out", s(&dir.path().join("o"))]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn lemmas_are_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"schema": 1, "potential": {"kind": "zero"},
            "lemmas": {"seed": 9, "counts": {"unit": 3, "general": 3, "periodic": 3, "nonresonant": 2, "half_period": 2}}}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(fembed(&["lemmas", "--config", s(&cfg), "--out", s(&a), "--seed", "1"]).status.code(), Some(0));
    assert_eq!(fembed(&["lemmas", "--config", s(&cfg), "--out", s(&b), "--seed", "1"]).status.code(), Some(0));
    assert_eq!(std::fs::read(a.join("lemmas.json")).unwrap(), std::fs::read(b.join("lemmas.json")).unwrap());
}

#[test]
fn synth_outputs_are_deterministic_and_mode_flag_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SINGLE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for o in [&a, &b] {
        assert_eq!(fembed(&["synth", "--config", s(&cfg), "--out", s(o), "--x-max", "500"]).status.code(), Some(0));
    }
    for f in ["potential.csv", "trajectory.json", "plan.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("plan.json")).unwrap()).unwrap();
    let x_last = plan["plan"]["targets"][0]["activation"].as_f64().unwrap();
    assert!(x_last < 500.0);

    // Paper mode only needs the plan; its activation is far beyond x_max.
    let r = fembed(&["synth", "--config", s(&cfg), "--out", s(&dir.path().join("p")), "--mode", "paper"]);
    assert_ne!(r.status.code(), Some(0));
}
