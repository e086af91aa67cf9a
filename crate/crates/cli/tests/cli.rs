use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levelmetric")).args(args).output().expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is JSON"))
        .collect()
}

#[test]
fn verify_real_annulus_passes() {
    let out = run(&["verify", "--suite", "real", "--field", "x^2+y^2", "--band", "1", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = json_lines(&out);
    assert_eq!(recs.len(), 7);
    for r in &recs {
        assert_eq!(r["status"], "pass", "{r}");
        assert_eq!(r["report"]["pass"], true);
        for c in r["report"]["checks"].as_array().unwrap() {
            assert_eq!(c["pass"], true, "{c}");
        }
    }
}

#[test]
fn verify_complex_lemniscate_band_passes() {
    let out = run(&["verify", "--suite", "complex", "--field", "z^2-1", "--band", "0.5", "1.5", "--window", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ids: Vec<String> = json_lines(&out).iter().map(|r| r["identity_id"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids, ["complex", "complex_lower_bound"]);
}

#[test]
fn reversed_band_is_a_config_error() {
    let out = run(&["verify", "--field", "x^2+y^2", "--band", "4", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("band must satisfy a<b"));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_field_and_bad_preset_are_config_errors() {
    assert_eq!(run(&["verify", "--band", "1", "4"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--preset", "donut"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--field", "x^^2", "--band", "1", "4"]).status.code(), Some(2));
}

#[test]
fn tolerance_override_is_applied() {
    let out = run(&["verify", "--field", "x^2+y^2", "--band", "1", "4", "--tol", "coarea=1e-20"]);
    assert_eq!(out.status.code(), Some(1));
    let recs = json_lines(&out);
    let coarea = recs.iter().find(|r| r["identity_id"] == "coarea").unwrap();
    assert_eq!(coarea["status"], "fail");
    assert_eq!(coarea["report"]["tolerance"].as_f64().unwrap(), 1e-20);
}

#[test]
fn contour_unit_circle_is_one_component() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let out = run(&["contour", "--field", "x^2+y^2", "--t", "1", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("component_id,x,y,kappa,grad_norm"));
    let mut rows = 0;
    for l in lines {
        let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[0], 0.0);
        assert!((cols[1].hypot(cols[2]) - 1.0).abs() < 1e-6);
        assert!((cols[3] - 1.0).abs() < 1e-6);
        rows += 1;
    }
    assert!(rows > 100);
}

#[test]
fn evolve_ellipse_area_loses_two_pi_per_unit_time() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    let out = run(&["evolve", "--csf", "--shape", "ellipse:2,1", "--t-end", "0.5", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,L,A"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    let c0 = rows[0][2] + 2.0 * std::f64::consts::PI * rows[0][0];
    for r in &rows {
        let c = r[2] + 2.0 * std::f64::consts::PI * r[0];
        assert!((c - c0).abs() / c0 < 1e-3, "A + 2 pi t drifted: {c} vs {c0}");
    }
    assert!((rows.last().unwrap()[0] - 0.5).abs() < 1e-9);
}

#[test]
fn evolve_offset_circle_length_grows_linearly() {
    let out = run(&["evolve", "--shape", "circle:1", "--vertices", "1024", "--t-end", "1", "--steps", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for l in text.lines().skip(1) {
        let r: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        let exact = 2.0 * std::f64::consts::PI * (1.0 + r[0]);
        assert!((r[1] - exact).abs() / exact < 1e-4);
    }
}

#[test]
fn evolve_rejects_bad_shape() {
    assert_eq!(run(&["evolve", "--shape", "square:1"]).status.code(), Some(2));
    assert_eq!(run(&["evolve", "--csf", "--dt", "-1"]).status.code(), Some(2));
}

#[test]
fn surface_sphere_has_euler_characteristic_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.off");
    let out = run(&["surface", "--field", "x^2+y^2+z^2", "--t", "1", "--grid-n", "32", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let meta: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(meta["euler_characteristic"], 2);
    assert_eq!(meta["closed_manifold"], true);
    let off = std::fs::read_to_string(path).unwrap();
    let mut lines = off.lines();
    assert_eq!(lines.next(), Some("OFF"));
    let counts: Vec<i64> = lines.next().unwrap().split_whitespace().map(|c| c.parse().unwrap()).collect();
    assert_eq!(counts[0] - counts[2] + counts[1], 2);
}

#[test]
fn surface_leaving_the_window_fails() {
    let out = run(&["surface", "--field", "x^2+y^2+z^2", "--t", "9", "--window", "2", "--grid-n", "16"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("leaves the window"));
}

#[test]
fn preset_runs_with_its_own_band() {
    let out = run(&["verify", "--preset", "saddle"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = json_lines(&out);
    assert_eq!(recs[0]["identity_id"], "saddle_symmetry");
}
