use std::path::Path;
use std::process::{Command, Output};

use fatmesh::{fmesh, generate};

const TRIANGLE: &str = "fmesh 2 3 1\n0 0\n1 0\n0.5 0.8660254037844386\n0 1 2\n";

fn fatmesh(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fatmesh")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("errors are reported as JSON")
}

fn write_grids(dir: &Path) {
    let k1 = generate::square_grid(10, 10, 1.0, [0.0, 0.0]);
    let k2 = generate::rotated(&k1, std::f64::consts::PI / 6.0, [5.0, 5.0]);
    fmesh::write_file(dir.join("k1.fmesh"), &k1).unwrap();
    fmesh::write_file(dir.join("k2.fmesh"), &k2).unwrap();
}

#[test]
fn fatness_of_equilateral_triangle() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.fmesh"), TRIANGLE).unwrap();
    let out = fatmesh(&["fatness", "--in", "t.fmesh"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let f = v["min_fatness"].as_f64().unwrap();
    assert!((f - 3f64.sqrt() / 4.0).abs() < 1e-12, "{f}");
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fatmesh(&["pipeline", "--t1", "nope.fmesh", "--t2", "nope.fmesh", "--eps", "4", "--out-dir", "out"], dir.path());
    assert_eq!(out.status.code(), Some(6));
    assert_eq!(stderr_json(&out)["exit_code"], 6);
    assert!(!dir.path().join("out").join("merged.fmesh").exists());
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.fmesh"), "fmesh 2 1 1\n0 x\n0\n").unwrap();
    let out = fatmesh(&["validate", "--in", "bad.fmesh"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_flags_overlaps() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ok.fmesh"), TRIANGLE).unwrap();
    assert!(fatmesh(&["validate", "--in", "ok.fmesh"], dir.path()).status.success());
    let overlapping = "fmesh 2 4 2\n0 0\n2 0\n0 2\n0.5 0.5\n0 1 2\n0 1 3\n";
    std::fs::write(dir.path().join("bad.fmesh"), overlapping).unwrap();
    let out = fatmesh(&["validate", "--in", "bad.fmesh"], dir.path());
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_grids(dir.path());
    for run in ["a", "b"] {
        let out = fatmesh(
            &["pipeline", "--t1", "k1.fmesh", "--t2", "k2.fmesh", "--eps", "4", "--seed", "3", "--out-dir", run],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["merged.fmesh", "coloring.json", "dilatation.json", "summary.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 3);
    assert!(summary["map"]["global_k"].as_f64().unwrap() >= 1.0);
}

#[test]
fn mash_writes_mesh_and_log() {
    let dir = tempfile::tempdir().unwrap();
    write_grids(dir.path());
    std::fs::write(dir.path().join("cfg.json"), r#"{"eps": 4.0, "seed": 9}"#).unwrap();
    let out = fatmesh(
        &["mash", "--k1", "k1.fmesh", "--k2", "k2.fmesh", "--config", "cfg.json", "--out", "m.fmesh", "--log", "m.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let merged = fmesh::read_file(dir.path().join("m.fmesh")).unwrap();
    assert!(fatmesh::validate::validate_complex(&merged).is_empty());
    let log: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(log["seed"], 9);

    std::fs::write(dir.path().join("typo.json"), r#"{"epsilon": 4.0}"#).unwrap();
    let out = fatmesh(
        &["mash", "--k1", "k1.fmesh", "--k2", "k2.fmesh", "--config", "typo.json", "--out", "x", "--log", "y"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn chessboard_then_qm_eval() {
    let dir = tempfile::tempdir().unwrap();
    fmesh::write_file(dir.path().join("tb.fmesh"), &generate::tetrahedron_boundary()).unwrap();
    let out = fatmesh(&["chessboard", "--in", "tb.fmesh", "--out", "even.fmesh", "--coloring", "col.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fmesh::read_file(dir.path().join("even.fmesh")).unwrap().num_simplices(), 24);

    let square = generate::square_grid(2, 2, 1.0, [0.0, 0.0]);
    fmesh::write_file(dir.path().join("sq.fmesh"), &square).unwrap();
    let out = fatmesh(&["chessboard", "--in", "sq.fmesh", "--out", "sq2.fmesh", "--coloring", "sqcol.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = fatmesh(
        &["qm-eval", "--in", "sq2.fmesh", "--coloring", "sqcol.json", "--samples", "4", "--out", "k.json", "--csv", "k.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let k: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("k.json")).unwrap()).unwrap();
    assert!(k["global_k"].as_f64().unwrap().is_finite());
    let csv = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
    assert!(csv.starts_with("sample,k\n") && csv.lines().count() > 1);
}

#[test]
fn prism_from_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"core": [[0,0],[1,0],[0.5,0.8660254037844386]], "strata_count": 2, "strata_width": 0.5, "slab_count": 2, "slab_height": 0.5}"#;
    std::fs::write(dir.path().join("spec.json"), spec).unwrap();
    let out = fatmesh(&["prism", "--spec", "spec.json", "--out", "tube.fmesh", "--report", "r.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tube = fmesh::read_file(dir.path().join("tube.fmesh")).unwrap();
    assert_eq!(tube.ambient_dim(), 3);
    assert!(fatmesh::validate::validate_complex(&tube).is_empty());
}
