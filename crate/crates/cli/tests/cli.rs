use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use crcm_cli::run::Manifest;
use crcm_cli::{content_hash, ExperimentConfig, ReportFile};

fn crcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crcm")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SWEEP: &str = r#"{
  "model": "poisson",
  "params": { "z": 1.0, "q": 1.0, "radius_law": "dirac:0.5", "dimension": 2, "side": 4.0 },
  "replicas": 20,
  "z_grid": [0.4, 0.7, 1.0, 1.3, 1.6, 1.9, 2.2, 2.5],
  "analyses": [
    { "kind": "crossing" },
    { "kind": "domination", "statistic": "count" },
    { "kind": "threshold" }
  ],
  "seed": 7
}"#;

#[test]
fn zero_replicas_write_manifest_and_empty_streams() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "model": "crcm", "replicas": 0, "analyses": [{ "kind": "crossing" }] }"#);
    let out = dir.path().join("out");
    let o = crcm(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("manifest.json").exists());
    let stream = fs::read_to_string(out.join("samples.ndjson")).unwrap();
    assert_eq!(stream.lines().count(), 1, "header only");
    let report: ReportFile = serde_json::from_str(&fs::read_to_string(out.join("reports/crossing.json")).unwrap()).unwrap();
    assert!(report.entries[0].reports.is_empty());
}

#[test]
fn sweep_layout_and_byte_identical_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = crcm(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "2"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv = fs::read_to_string(a.join("curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 8);
    let reports: Vec<_> = fs::read_dir(a.join("reports")).unwrap().collect();
    assert_eq!(reports.len(), 3);
    for rel in ["curve.csv", "reports/crossing.json", "reports/domination-count.json", "reports/threshold.json", "samples/z03.ndjson"] {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{rel} differs");
    }
    // the manifests differ only in the output directory
    let (ma, mb): (Manifest, Manifest) = (
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap(),
        serde_json::from_str(&fs::read_to_string(b.join("manifest.json")).unwrap()).unwrap(),
    );
    assert_eq!(ma.outputs, mb.outputs);
}

#[test]
fn manifest_round_trips_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let out = dir.path().join("out");
    let o = crcm(&["sample", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m: Manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.seed, 11);
    assert_eq!(m.config.seed, 11);
    assert_eq!(m.config_sha1, content_hash(m.config.to_json().as_bytes()));
    let back = ExperimentConfig::parse(&m.config.to_json(), Path::new("manifest")).unwrap();
    assert_eq!(back, m.config);
    let bytes = fs::read(out.join("samples.ndjson")).unwrap();
    let listed = m.outputs.iter().find(|f| f.path == "samples.ndjson").unwrap();
    assert_eq!(listed.sha1, content_hash(&bytes));

    // rerunning the persisted config reproduces the stream
    let again = dir.path().join("again");
    fs::write(dir.path().join("resolved.json"), m.config.to_json()).unwrap();
    let o = crcm(&["sample", "--config", dir.path().join("resolved.json").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(again.join("samples.ndjson")).unwrap(), bytes);
}

#[test]
fn existing_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let args = ["sample", "--model", "poisson", "--replicas", "3", "--out", out.to_str().unwrap()];
    assert!(crcm(&args).status.success());
    let o = crcm(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert!(crcm(&forced).status.success());
}

#[test]
fn parse_errors_are_line_anchored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"model\": \"crcm\",\n  \"sampler\": { \"stepz\": 3 }\n}\n");
    let o = crcm(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("{cfg}:3:")), "{}", stderr(&o));
}

#[test]
fn validate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "model": "crcm", "params": { "z": 1, "q": 2, "radius_law": "dirac:0", "dimension": 2, "side": 4 } }"#);
    let o = crcm(&["validate", "--config", &cfg]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("warning: Q=δ_0: trivially no percolation"));

    let cfg = write_config(dir.path(), r#"{ "model": "crcm", "params": { "z": 1, "q": 0.5, "radius_law": "power:3:inf", "dimension": 2, "side": 4 } }"#);
    let o = crcm(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("case C2 requires bounded radii"));

    let cfg = write_config(dir.path(), r#"{ "model": "crcm", "params": { "z": 1, "q": 2, "radius_law": "dirac:0.5", "dimension": 2, "side": 4 }, "analyses": [{ "kind": "vacant-bound" }] }"#);
    assert_eq!(crcm(&["validate", "--config", &cfg]).status.code(), Some(2));

    let cfg = write_config(dir.path(), r#"{ "model": "crcm", "params": { "z": 1, "q": 2, "radius_law": "dirac:0.5", "dimension": 2, "side": 4 } }"#);
    let o = crcm(&["validate", "--config", &cfg]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok (case C1)");
}

#[test]
fn exit_codes_for_guard_and_assert() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("guard");
    let o = crcm(&["sample", "--model", "crcm-exact", "--z", "1", "--q", "2", "--window", "40", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    // exact CRCM samples pass the GNZ check
    let cfg = write_config(
        dir.path(),
        r#"{ "model": "crcm-exact", "params": { "z": 0.5, "q": 2, "radius_law": "dirac:0.5", "dimension": 2, "side": 2 },
             "replicas": 400, "analyses": [{ "kind": "gnz", "function": "isolated" }, { "kind": "partition-function", "samples": 200 }] }"#,
    );
    let out = dir.path().join("ok");
    let o = crcm(&["analyze", "--assert", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    // an unmixed chain (one step from empty) sits far below Poisson(qz)
    let cfg = write_config(
        dir.path(),
        r#"{ "model": "crcm", "params": { "z": 4.0, "q": 0.5, "radius_law": "dirac:0.5", "dimension": 2, "side": 4 },
             "sampler": { "steps": 1, "burn_in": 0, "thin": 1 },
             "replicas": 50, "analyses": [{ "kind": "domination", "statistic": "count" }] }"#,
    );
    let out = dir.path().join("unmixed");
    let o = crcm(&["analyze", "--assert", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}
