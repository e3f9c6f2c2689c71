mod common;

use common::scenario;
use cspace_core::config::SceneConfig;
use cspace_core::integrate::integrate;
use cspace_core::CspaceError;
use std::path::Path;

fn f0_json() -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(scenario("f0_pointfeature.json")).unwrap()).unwrap()
}

fn build(v: &serde_json::Value) -> cspace_core::Result<cspace_core::config::Loaded> {
    SceneConfig::parse(&v.to_string())?.build(Path::new("."))
}

#[test]
fn f0_loads() {
    let l = build(&f0_json()).unwrap();
    assert_eq!(l.scene.features.len(), 1);
    assert_eq!(l.resolution, (320, 240));
    assert_eq!(l.plan.reference_device, "s1");
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v = f0_json();
    v["run"]["colour"] = "red".into();
    assert!(matches!(build(&v), Err(CspaceError::Config(_))));
    let mut v = f0_json();
    v["sensors"][0]["devices"][0]["near_m"] = 0.4.into();
    assert!(matches!(build(&v), Err(CspaceError::Config(_))));
}

#[test]
fn small_resolution_is_rejected() {
    let mut v = f0_json();
    v["run"]["render_resolution_px"] = serde_json::json!([15, 240]);
    assert!(matches!(build(&v), Err(CspaceError::Config(_))));
    v["run"]["render_resolution_px"] = serde_json::json!([16, 16]);
    assert_eq!(build(&v).unwrap().resolution, (16, 16));
}

#[test]
fn missing_reference_device_is_rejected() {
    let mut v = f0_json();
    v["run"]["reference_device"] = "nope".into();
    assert!(build(&v).is_err());
}

#[test]
fn bad_geometry_is_rejected() {
    let mut v = f0_json();
    v["sensors"][0]["devices"][0]["far_mm"] = 300.into();
    assert!(build(&v).is_err());
    let mut v = f0_json();
    v["features"][0]["l_f_mm"] = (-5).into();
    assert!(build(&v).is_err());
}

#[test]
fn loading_twice_gives_identical_spaces() {
    let a = SceneConfig::load(&scenario("academic_scenario.json")).unwrap();
    let b = SceneConfig::load(&scenario("academic_scenario.json")).unwrap();
    let (ra, rb) = (integrate(&a.scene, &a.plan).unwrap(), integrate(&b.scene, &b.plan).unwrap());
    for (x, y) in ra.spaces.iter().zip(&rb.spaces) {
        assert_eq!(x.manifold.vertices, y.manifold.vertices);
        assert_eq!(x.manifold.faces, y.manifold.faces);
    }
}
