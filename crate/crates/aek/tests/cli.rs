use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PARABOLOID: &str = r#"{"coefficients": {"2,0": "1/2", "0,2": "1/2"}, "patch": {"u": [-1, 1], "v": [-1, 1]}}"#;
const SPHERE: &str = r#"{"sphere": {"center": [0, 0, 1], "radius": 1}, "patch": {"u": [-0.5, 0.5], "v": [-0.5, 0.5]}, "grid": 5}"#;
const HYPERBOLIC: &str = r#"{"coefficients": {"2,0": 1, "0,2": -1}}"#;
const EXAMPLE: &str = r#"{"coefficients": {"2,0": "1/2", "0,2": "1/2", "3,0": 1, "1,2": -3}, "patch": {"u": [-0.05, 0.05], "v": [-0.05, 0.05]}, "grid": 3}"#;

fn spec(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn aek(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aek")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn paraboloid_normalizes_to_zero_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "p.json", PARABOLOID);
    let out = aek(&["normalize", "--spec", p.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["results"]["a"], "0");
    assert_eq!(r["results"]["b"], "0");
    assert_eq!(r["results"]["volume_factor"], "1");
}

#[test]
fn sphere_quartic_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "s.json", SPHERE);
    let r = report(&aek(&["normalize", "--spec", p.to_str().unwrap()]));
    assert_eq!(r["results"]["f4"]["f40"], "1/8");
    assert_eq!(r["results"]["f4"]["f04"], "1/8");
    assert_eq!(r["results"]["f4"]["f22"], "1/4");
}

#[test]
fn hyperbolic_surface_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "h.json", HYPERBOLIC);
    assert_eq!(code(&aek(&["normalize", "--spec", p.to_str().unwrap()])), 2);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = spec(dir.path(), "bad.json", r#"{"coefficients": {"2,0": 1}, "extra": true}"#);
    assert_eq!(code(&aek(&["normalize", "--spec", bad.to_str().unwrap()])), 1);
    let p = spec(dir.path(), "p.json", PARABOLOID);
    assert_eq!(code(&aek(&["normalize", "--spec", p.to_str().unwrap(), "--point", "x"])), 1);
    assert_eq!(code(&aek(&["normalize"])), 1);
    assert_eq!(code(&aek(&["frobnicate"])), 1);
}

#[test]
fn point_outside_patch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "p.json", PARABOLOID);
    assert_eq!(code(&aek(&["normalize", "--spec", p.to_str().unwrap(), "--point", "3,0"])), 2);
}

#[test]
fn sphere_centers_are_the_sphere_center() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "s.json", SPHERE);
    let r = report(&aek(&["invariants", "--spec", p.to_str().unwrap(), "--direction", "1,0"]));
    for key in ["moutard_center", "center_of_affine_curvature"] {
        assert_eq!(r["results"][key]["world"]["kind"], "Finite");
        assert_eq!(r["results"][key]["world"]["point"], serde_json::json!(["0", "0", "1"]));
    }
    assert_eq!(r["results"]["mu_prime"], "0");
}

#[test]
fn paraboloid_center_is_at_infinity() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "p.json", PARABOLOID);
    let r = report(&aek(&["invariants", "--spec", p.to_str().unwrap(), "--direction", "3/5,4/5"]));
    assert_eq!(r["results"]["moutard_center"]["local"]["kind"], "AtInfinity");
    assert_eq!(r["results"]["moutard_center"]["world"]["kind"], "AtInfinity");
}

#[test]
fn cone_direction_echo_in_normal_form() {
    // a = 1, b = 0 at the origin: s(e1) = (-2a, 6b, 1)
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "e.json", EXAMPLE);
    let r = report(&aek(&["invariants", "--spec", p.to_str().unwrap()]));
    assert_eq!(r["results"]["cone_direction"]["local"], serde_json::json!(["-2", "0", "1"]));
}

#[test]
fn float_mode_invariants_accept_angles() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "e.json", EXAMPLE);
    let out = aek(&["invariants", "--spec", p.to_str().unwrap(), "--mode", "float", "--direction", "0.7", "--point", "0.01,-0.02"]);
    assert_eq!(code(&out), 0);
    assert!(report(&out)["results"]["mu"].is_number());
    let out = aek(&["invariants", "--spec", p.to_str().unwrap(), "--direction", "0.7"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_seed_42_passes() {
    let out = aek(&["verify", "--seed", "42"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["ok"], true);
    assert_eq!(r["results"]["checks"].as_array().unwrap().len(), 7);
}

#[test]
fn verify_detects_corrupted_h12() {
    let out = aek(&["verify", "--seed", "42", "--inject-fault", "h12"]);
    assert_eq!(code(&out), 3);
    let r = report(&out);
    let failed: Vec<&str> = r["results"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["expansion_order4"]);
}

#[test]
fn verify_float_mode_warns() {
    let out = aek(&["verify", "--seed", "42", "--mode", "float"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: float mode"));
}

#[test]
fn verify_reports_are_byte_identical() {
    let a = aek(&["verify", "--seed", "5"]);
    let b = aek(&["verify", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sphere_evolute_is_the_center() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "s.json", SPHERE);
    let out_dir = dir.path().join("out");
    let out = aek(&["evolute", "--spec", p.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(out_dir.join("evolute_points.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "u,v,branch_id,theta,x,y,z,D_residual,regular_flag");
    let rows = rows(&csv);
    assert_eq!(rows.len(), 25);
    for r in &rows {
        let x: Vec<f64> = r[4..7].iter().map(|s| s.parse().unwrap()).collect();
        assert!(x[0].abs() < 1e-10 && x[1].abs() < 1e-10 && (x[2] - 1.0).abs() < 1e-10, "{r:?}");
        assert_eq!(r[2], "0");
    }
    let rep: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["results"]["branches"][0]["degenerate"], true);
}

#[test]
fn worked_example_has_six_branches_at_the_center() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "e.json", EXAMPLE);
    let out_dir = dir.path().join("out");
    assert_eq!(code(&aek(&["evolute", "--spec", p.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])), 0);
    let rows = rows(&fs::read_to_string(out_dir.join("evolute_points.csv")).unwrap());
    let mut ids: Vec<&str> = rows.iter().filter(|r| r[0] == "0.0" && r[1] == "0.0").map(|r| r[2].as_str()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 6);
}

#[test]
fn empty_grid_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "e.json", EXAMPLE);
    let out_dir = dir.path().join("out");
    let out = aek(&["evolute", "--spec", p.to_str().unwrap(), "--grid", "0", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn all_samples_failing_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(
        dir.path(),
        "n.json",
        r#"{"coefficients": {"2,0": -1, "0,2": -1}, "allow_nonconvex": true, "grid": 2}"#,
    );
    let out_dir = dir.path().join("out");
    assert_eq!(code(&aek(&["evolute", "--spec", p.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])), 2);
}

#[test]
fn evolute_outputs_are_reproducible_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "e.json", EXAMPLE);
    let run = |name: &str, workers: &str| {
        let d = dir.path().join(name);
        let out = aek(&["evolute", "--spec", p.to_str().unwrap(), "--grid", "5", "--workers", workers, "--out", d.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        d
    };
    let (a, b) = (run("a", "1"), run("b", "3"));
    for f in ["evolute_points.csv", "evolute_mesh.obj", "report.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.join("evolute_points.csv")).unwrap();
    let points: std::collections::BTreeSet<String> = rows(&csv).iter().map(|r| r[4..7].join(" ")).collect();
    let obj = fs::read_to_string(a.join("evolute_mesh.obj")).unwrap();
    let mut vertices = 0;
    for line in obj.lines() {
        if let Some(v) = line.strip_prefix("v ") {
            vertices += 1;
            assert!(points.contains(v), "{v}");
        } else {
            assert!(line.starts_with("f "), "{line}");
            let idx: Vec<usize> = line[2..].split(' ').map(|s| s.parse().unwrap()).collect();
            assert!(idx.iter().all(|&i| i >= 1 && i <= vertices));
        }
    }
    assert!(vertices > 0 && obj.contains("\nf "));
}

#[test]
fn report_keys_match_schema() {
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let props = schema["properties"].as_object().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = spec(dir.path(), "e.json", EXAMPLE);
    for args in [
        vec!["normalize", "--spec", p.to_str().unwrap()],
        vec!["invariants", "--spec", p.to_str().unwrap(), "--timing"],
        vec!["verify", "--seed", "3"],
    ] {
        let r = report(&aek(&args));
        let obj = r.as_object().unwrap();
        for k in &required {
            assert!(obj.contains_key(*k), "{k} missing");
        }
        for k in obj.keys() {
            assert!(props.contains_key(k), "{k} not in schema");
        }
        let cmd = r["command"].as_str().unwrap();
        assert!(schema["properties"]["command"]["enum"].as_array().unwrap().iter().any(|v| v == cmd));
    }
}
