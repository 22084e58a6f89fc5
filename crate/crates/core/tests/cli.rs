use std::process::Command;

use bqk::cli::{run_with, EXIT_INPUT, EXIT_OK};
use serde_json::Value;

fn bqk(args: &[&str]) -> bqk::cli::Outcome {
    run_with(std::iter::once("bqk").chain(args.iter().copied()), None)
}

fn json(out: &bqk::cli::Outcome) -> Value {
    assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn binary_runs_and_reports_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_bqk");
    let ok = Command::new(exe).args(["classify", "--manifold", "sphere"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["quantum_numbers"], "n ∈ Z");
    let bad = Command::new(exe).args(["classify", "--manifold", "moebius"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT));
    let err: Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(err["error"], "unknown_manifold");
}

#[test]
fn tolerance_environment_variable() {
    let exe = env!("CARGO_BIN_EXE_bqk");
    let out = Command::new(exe).args(["catalogue"]).env("BQK_TOL", "-1").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    let out = Command::new(exe).args(["spectrum", "--manifold", "torus:n=4"]).env("BQK_TOL", "1e-9").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bad_mesh_file_names_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    // the loop 1, 2, 3 does not close: edge 3 runs 1 → 3 instead of 3 → 1
    std::fs::write(
        &path,
        r#"{"name": "bad",
            "vertices": [{"id": 1}, {"id": 2}, {"id": 3}],
            "edges": [{"id": 1, "tail": 1, "head": 2}, {"id": 2, "tail": 2, "head": 3}, {"id": 3, "tail": 1, "head": 3}],
            "faces": [{"id": 1, "loop": [1, 2, 3]}]}"#,
    )
    .unwrap();
    let out = bqk(&["classify", "--mesh", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INPUT);
    let err: Value = serde_json::from_str(&out.stderr).unwrap();
    assert_eq!(err["error"], "non_closing_face");

    std::fs::write(&path, r#"{"vertices": [{"id": 1}], "edges": [{"id": 1, "tail": 1, "head": 7}]}"#).unwrap();
    let out = bqk(&["classify", "--mesh", path.to_str().unwrap()]);
    let err: Value = serde_json::from_str(&out.stderr).unwrap();
    assert_eq!(err["error"], "dangling_edge");
}

#[test]
fn mesh_file_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("torus.json");
    bqk::mesh::io::save_mesh(&bqk::mesh::catalogue::torus(4, 5).unwrap(), &path).unwrap();
    let v = json(&bqk(&["classify", "--mesh", path.to_str().unwrap()]));
    assert_eq!(v["H1"]["betti"], 2);
    assert_eq!(v["H2"]["betti"], 1);
}

#[test]
fn corrupted_connection_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conn.json");
    // edge 1 given twice with inconsistent orientation
    std::fs::write(&path, r#"{"mesh": "circle", "edge_phases": {"1": 0.3, "-1": 0.3}}"#).unwrap();
    let out = bqk(&["spectrum", "--manifold", "circle:n=8", "--connection", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INPUT);
    let err: Value = serde_json::from_str(&out.stderr).unwrap();
    assert_eq!(err["error"], "broken_antisymmetry");

    std::fs::write(&path, r#"{"mesh": "circle", "edge_phases": {"1": 0.3, "-1": -0.3}}"#).unwrap();
    let v = json(&bqk(&["spectrum", "--manifold", "circle:n=8", "--connection", path.to_str().unwrap()]));
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 6);
}

#[test]
fn classify_examples() {
    let torus = json(&bqk(&["classify", "--manifold", "torus"]));
    assert_eq!(torus["H1"], serde_json::json!({"betti": 2, "torsion": []}));
    assert_eq!(torus["quantum_numbers"], "n ∈ Z, ϑ_1…ϑ_2 ∈ [0,1)");
    let rp2 = json(&bqk(&["classify", "--manifold", "projective_plane"]));
    assert_eq!(rp2["quantum_numbers"], "m ∈ Z_2");
    assert!(rp2["physical_reading"].as_str().unwrap().contains("fermionic"));
    let mono = json(&bqk(&["classify", "--manifold", "sphere", "--monopole", "-3"]));
    assert_eq!(mono["connection"]["chern"]["free"], serde_json::json!([-3]));
}

#[test]
fn spectrum_examples() {
    let v = json(&bqk(&["spectrum", "--manifold", "circle", "--theta", "0.25", "--modes", "64"]));
    let e: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let mut want: Vec<f64> = (-64i64..=64).map(|k| (k as f64 - 0.25).powi(2)).collect();
    want.sort_by(f64::total_cmp);
    assert_eq!(e, want);
    assert_eq!(v["momentum_by_mode"]["3"], 2.75);

    let v = json(&bqk(&["spectrum", "--manifold", "sphere", "--monopole", "2", "--subdiv", "3"]));
    assert_eq!(v["clusters"][0]["size"], 3);
    assert_eq!(v["chern_number"], 2);
    assert_eq!(v["refinement_trend"].as_array().unwrap().len(), 2);

    let csv = bqk(&["spectrum", "--manifold", "circle", "--theta-sweep", "0:1:0.05", "--format", "csv"]);
    let lines: Vec<&str> = csv.stdout.lines().collect();
    assert_eq!(lines.len(), 22);
    assert!(lines[1].starts_with("0,0.0"));
    assert!(lines[21].starts_with("1,"));

    let sweep = json(&bqk(&["spectrum", "--manifold", "annulus", "--theta-sweep", "0:1:0.5", "--eigs", "3"]));
    let rows = sweep["rows"].as_array().unwrap();
    // θ = 0 and θ = 1 are the same class
    for (a, b) in rows[0]["eigenvalues"].as_array().unwrap().iter().zip(rows[2]["eigenvalues"].as_array().unwrap()) {
        assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-10);
    }
}

#[test]
fn dump_and_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let dump = dir.path().join("h.json");
    let o = bqk(&[
        "spectrum",
        "--manifold",
        "torus:n=4",
        "--theta",
        "0.5",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
        "--dump-hamiltonian",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("index,eigenvalue,cluster,residual\n"));
    assert!(std::fs::read_to_string(&dump).unwrap().starts_with("row,col,re,im\n"));
}

#[test]
fn verify_examples() {
    let v = json(&bqk(&["verify", "--manifold", "torus"]));
    assert_eq!(v["passed"], true);
    let v = json(&bqk(&["verify", "--manifold", "sphere", "--monopole", "1"]));
    let trend = v["checks"]["curvature_commutator"]["trend"].as_array().unwrap();
    assert_eq!(trend.len(), 3);
    assert!(trend.iter().all(|r| r["field_strength_scale"].as_f64().unwrap() > 0.4));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["classify", "--manifold", "genus_surface"],
        vec!["spectrum", "--manifold", "sphere", "--monopole", "1", "--seed", "7"],
        vec!["spectrum", "--manifold", "annulus", "--theta", "0.3", "--format", "csv"],
        vec!["verify", "--manifold", "projective_plane", "--seed", "3"],
        vec!["catalogue"],
    ] {
        let a = bqk(&args);
        let b = bqk(&args);
        assert_eq!(a.code, 0, "{args:?}: {}", a.stderr);
        assert_eq!(a.stdout.as_bytes(), b.stdout.as_bytes(), "{args:?}");
    }
}
