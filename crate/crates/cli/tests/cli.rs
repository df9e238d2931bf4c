use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn idprof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idprof"))
        .args(args)
        .output()
        .expect("spawn idprof")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Exit status is nonzero and stderr carries `{"error": code, ...}`.
fn assert_fails_with(out: &Output, code: &str) {
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let doc: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap())
        .unwrap_or_else(|e| panic!("stderr is not an error document ({e}): {stderr}"));
    assert_eq!(doc["error"], code, "{stderr}");
    assert!(doc["message"].as_str().is_some_and(|m| !m.is_empty()));
}

fn synth(dir: &Path, spec: &str) -> std::path::PathBuf {
    let spec_path = dir.join("spec.json");
    fs::write(&spec_path, spec).unwrap();
    let out = dir.join("synth");
    let res = idprof(&["synth", p(&spec_path), "--out", p(&out)]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    out
}

#[test]
fn estimate_recovers_a_five_dimensional_cube() {
    let dir = tempfile::tempdir().unwrap();
    let out = synth(
        dir.path(),
        r#"{"kind": "hypercube", "intrinsic_dim": 5, "ambient_dim": 60, "n_points": 1500, "seed": 2}"#,
    );
    let res = idprof(&["estimate", p(&out.join("points.npy"))]);
    assert!(res.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(doc["kind"], "estimate");
    let value = doc["estimate"]["value"].as_f64().unwrap();
    assert!((4.0..=6.0).contains(&value), "{value}");
    assert_eq!(doc["estimate"]["config"]["k"], 20);
    assert_eq!(doc["estimate"]["config"]["aggregation"], "mackay");
}

#[test]
fn bootstrap_reports_a_spread() {
    let dir = tempfile::tempdir().unwrap();
    let out = synth(
        dir.path(),
        r#"{"kind": "hypersphere", "intrinsic_dim": 2, "ambient_dim": 3, "n_points": 400, "seed": 4}"#,
    );
    let res = idprof(&[
        "estimate",
        p(&out.join("points.npy")),
        "--bootstrap",
        "10",
        "--agg",
        "levina",
    ]);
    assert!(res.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(doc["estimate"]["spread"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["estimate"]["config"]["aggregation"], "levina");
}

#[test]
fn malformed_npy_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.npy");
    fs::write(&path, b"\x93NUMPY\x01\x00garbage").unwrap();
    assert_fails_with(&idprof(&["estimate", p(&path)]), "FormatError");
}

#[test]
fn k_at_least_n_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = synth(
        dir.path(),
        r#"{"kind": "hypercube", "intrinsic_dim": 2, "ambient_dim": 4, "n_points": 10, "seed": 1}"#,
    );
    assert_fails_with(
        &idprof(&["estimate", p(&out.join("points.npy")), "--k", "10"]),
        "KTooLarge",
    );
}

#[test]
fn subsample_larger_than_cloud_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = synth(
        dir.path(),
        r#"{"kind": "hypercube", "intrinsic_dim": 2, "ambient_dim": 4, "n_points": 50, "seed": 1}"#,
    );
    assert_fails_with(
        &idprof(&[
            "estimate",
            p(&out.join("points.npy")),
            "--k",
            "5",
            "--subsample",
            "51",
        ]),
        "SubsampleTooLarge",
    );
}

#[test]
fn missing_layer_dump_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let stack = synth(
        dir.path(),
        r#"{"kind": "layered_stack", "id_sequence": [2, 3], "n_points": 60, "ambient_dim": 8, "seed": 1}"#,
    );
    fs::remove_file(stack.join("layer_02.npy")).unwrap();
    let out = idprof(&[
        "profile",
        p(&stack.join("manifest.json")),
        "--k",
        "5",
        "--out",
        p(&dir.path().join("prof")),
    ]);
    assert_fails_with(&out, "MissingDump");
}

#[test]
fn profile_writes_requested_formats_only() {
    let dir = tempfile::tempdir().unwrap();
    let stack = synth(
        dir.path(),
        r#"{"kind": "layered_stack", "id_sequence": [2, 5, 3], "n_points": 200, "ambient_dim": 12, "seed": 3}"#,
    );
    let prof = dir.path().join("prof");
    let out = idprof(&[
        "profile",
        p(&stack.join("manifest.json")),
        "--k",
        "10",
        "--format",
        "json,csv",
        "--out",
        p(&prof),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(prof.join("profile.json").exists());
    assert!(prof.join("curve.csv").exists());
    assert!(!prof.join("curve.svg").exists());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(prof.join("profile.json")).unwrap()).unwrap();
    assert_eq!(doc["peak"]["i_star"], 2);
    assert_eq!(doc["curve"]["points"].as_array().unwrap().len(), 3);
}

#[test]
fn correlate_needs_three_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records");
    fs::create_dir(&records).unwrap();
    let out = idprof(&["correlate", p(&records), "--out", p(&dir.path().join("c"))]);
    assert!(!out.status.success());
}

#[test]
fn unknown_flags_and_values_are_rejected() {
    let out = idprof(&["estimate", "x.npy", "--neighbours", "5"]);
    assert!(!out.status.success());
    let out = idprof(&["estimate", "x.npy", "--agg", "median"]);
    assert!(!out.status.success());
    let out = idprof(&["estimate", "x.npy", "--dataset-id", "mnist"]);
    assert!(!out.status.success(), "--dataset-id requires --domain");
}

#[test]
fn help_lists_subcommands() {
    let out = idprof(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in [
        "estimate",
        "profile",
        "aggregate",
        "correlate",
        "sweep",
        "synth",
    ] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}
