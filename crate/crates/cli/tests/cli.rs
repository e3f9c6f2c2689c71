use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    root().join("scenarios").join(name)
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn cspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cspace")).args(args).output().expect("run cspace")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn first_vertex(obj: &Path) -> [f64; 3] {
    let text = std::fs::read_to_string(obj).unwrap();
    let line = text.lines().find(|l| l.starts_with("v ")).unwrap();
    let v: Vec<f64> = line[2..].split_whitespace().map(|t| t.parse().unwrap()).collect();
    [v[0], v[1], v[2]]
}

#[test]
fn f0_characterize_gives_eight_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let o = cspace(&["characterize", "--config", s(&scenario("f0_pointfeature.json")), "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = cspace_geom::io::read_obj(&dir.path().join("cspace_s1.obj")).unwrap();
    assert_eq!(m.vertices.len(), 8);
    assert!(m.is_watertight());
    let meta = std::fs::read_to_string(dir.path().join("cspace_s1.meta.txt")).unwrap();
    assert!(meta.contains("frame lens"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["spaces"][0]["vertices"], 8);
    assert!(report["millis_total"].as_f64().unwrap() > 0.0);
}

#[test]
fn characterize_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = cspace(&["characterize", "--config", s(&scenario("academic_scenario.json")), "--out", s(d.path())]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let mut compared = 0;
    for n in names {
        // the report carries wall-clock timings
        if n == "report.json" {
            continue;
        }
        let x = std::fs::read(a.path().join(&n)).unwrap();
        let y = std::fs::read(b.path().join(&n)).unwrap();
        assert!(x == y, "{n:?} differs");
        compared += 1;
    }
    // 4 spaces with sidecars, 12 occlusion meshes with hit clouds
    assert_eq!(compared, 4 * 2 + 12 * 2);
}

#[test]
fn contradictory_workspace_exits_3_naming_c8() {
    let dir = tempfile::tempdir().unwrap();
    let o = cspace(&["characterize", "--config", s(&data("contradictory_workspace.json")), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("C8"), "{}", stderr(&o));
    // the report is still written
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let mut cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(scenario("f0_pointfeature.json")).unwrap()).unwrap();
    cfg["run"]["stray_field"] = serde_json::json!(1);
    std::fs::write(&bad, cfg.to_string()).unwrap();
    let o = cspace(&["characterize", "--config", s(&bad), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stray_field"));
    let o = cspace(&["characterize", "--config", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_passes_c1_vertices_and_fails_perturbed_copy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("f0_pointfeature.json");
    assert!(cspace(&["characterize", "--config", s(&cfg), "--out", s(dir.path())]).status.success());
    let obj = dir.path().join("cspace_s1.obj");
    let o = cspace(&["validate", "--config", s(&cfg), "--manifold", s(&obj), "--samples", "50", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("8/8 vertices pass"));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("cspace_s1.validation.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    assert_eq!(report["samples_passed"], 50);

    // scale the space by 1.02 about its centroid: every vertex leaves it
    let m = cspace_geom::io::read_obj(&obj).unwrap();
    let grown = m.scaled_about(1.02, &m.vertex_centroid());
    let bad = dir.path().join("grown.obj");
    cspace_geom::io::write_obj(&bad, &grown).unwrap();
    let o = cspace(&["validate", "--config", s(&cfg), "--manifold", s(&bad)]);
    assert_eq!(o.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("grown.validation.json")).unwrap()).unwrap();
    assert_eq!(report["vertices_passed"], 0);
}

#[test]
fn validate_empty_manifold_reports_empty() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.obj");
    std::fs::write(&empty, "").unwrap();
    let o = cspace(&["validate", "--config", s(&scenario("f0_pointfeature.json")), "--manifold", s(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim() == "empty");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("empty.validation.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "empty");
}

#[test]
fn render_at_academic_vertex_sees_all_features() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("academic_scenario.json");
    assert!(cspace(&["characterize", "--config", s(&cfg), "--out", s(dir.path())]).status.success());
    for dev in ["s1", "s2", "s3", "s4"] {
        let [x, y, z] = first_vertex(&dir.path().join(format!("cspace_{dev}.obj")));
        let pose = format!("{x},{y},{z}");
        let o = cspace(&["render", "--config", s(&cfg), "--device", dev, "--pose", &pose, "--out", s(dir.path()), "--resolution", "160x120"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let out = stdout(&o);
        for f in ["f1", "f2", "f3"] {
            assert!(out.contains(&format!("feature {f}: 5/5")), "{dev}: {out}");
        }
        let pgm = std::fs::read(dir.path().join(format!("depth_{dev}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n160 120\n65535\n"));
        assert_eq!(pgm.len(), b"P5\n160 120\n65535\n".len() + 160 * 120 * 2);
    }
}

#[test]
fn render_from_behind_object_sees_no_feature_points() {
    let dir = tempfile::tempdir().unwrap();
    // below the object plate looking down, away from it
    let o = cspace(&[
        "render", "--config", s(&scenario("academic_scenario.json")), "--pose", "0,0,-800,0,0,0", "--out", s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["f1", "f2", "f3"] {
        assert!(stdout(&o).contains(&format!("feature {f}: 0/5")));
    }
}

#[test]
fn render_rejects_bad_pose() {
    let cfg = scenario("f0_pointfeature.json");
    for pose in ["1,2", "1,2,3,4", "a,b,c", "1,2,inf"] {
        let o = cspace(&["render", "--config", s(&cfg), "--pose", pose]);
        assert_eq!(o.status.code(), Some(2), "{pose}");
    }
    let o = cspace(&["render", "--config", s(&cfg), "--pose", "0,0,0", "--resolution", "8x8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn volume_reports_mesh_and_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let cube = dir.path().join("cube.obj");
    cspace_geom::io::write_obj(&cube, &cspace_geom::shapes::centered_box(&cspace_geom::Vec3::zeros(), &cspace_geom::Vec3::new(10.0, 20.0, 30.0))).unwrap();
    let o = cspace(&["volume", s(&cube), "--samples", "20000", "--seed", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v[0]["volume_mm3"].as_f64().unwrap() - 6000.0).abs() < 1e-6);
    // the box fills its bounding box, so every sample hits
    assert!((v[0]["mc_volume_mm3"].as_f64().unwrap() - 6000.0).abs() < 1e-6);
}
