mod common;

use common::*;
use cspace_core::cspace::ConstraintTag::*;
use cspace_core::domain::{Feature, RigidBody, Scene};
use cspace_core::integrate::{check_spec, integrate, orientation_base, Plan};
use cspace_core::verify::*;
use cspace_geom::shapes::centered_box;
use cspace_geom::{EulerZyx, Pose6D, Vec3};

#[test]
fn empty_scene_renders_nothing() {
    let scene = Scene { sensors: vec![comet(vec![s1()], 90.0)], ..Scene::default() };
    let img = render_depth(&scene, "s1", &Pose6D::identity(), (64, 48)).unwrap();
    assert_eq!((img.width, img.height), (64, 48));
    assert_eq!(img.nonzero(), 0);
    assert!(img.points().is_empty());
}

#[test]
fn plane_at_600_renders_depth_600() {
    let plate = RigidBody { id: "p".into(), mesh: centered_box(&Vec3::new(0.0, 0.0, 605.0), &Vec3::new(4000.0, 4000.0, 10.0)), pose: Pose6D::identity() };
    let scene = Scene { sensors: vec![comet(vec![s1()], 90.0)], occluders: vec![plate], ..Scene::default() };
    let img = render_depth(&scene, "s1", &Pose6D::identity(), (40, 30)).unwrap();
    assert_eq!(img.nonzero(), 40 * 30);
    assert!(img.depth.iter().all(|d| (d - 600.0).abs() <= 0.5));
    for p in img.points() {
        assert!((p.z - 600.0).abs() < 1e-6);
    }
    assert!(img.sees(&Vec3::new(0.0, 0.0, 600.0), 1.0));
    assert!(!img.sees(&Vec3::new(0.0, 0.0, 650.0), 1.0));
    // beyond the far plane is not a hit
    let far = render_depth(&scene, "s1", &Pose6D::translation_only(Vec3::new(0.0, 0.0, -300.0)), (20, 16)).unwrap();
    assert_eq!(far.nonzero(), 0);
}

#[test]
fn head_on_incidence_has_full_slack() {
    let scene = single_device_scene(Feature::flat("f0", Pose6D::identity(), 0.0));
    let p = Plan::new("s1", EulerZyx::ZERO).with_constraints(&[C1]);
    let spec = check_spec(&scene, &p, &orientation_base(&scene)).unwrap();
    let r = validate_viewpoint(&scene, &spec, &Vec3::new(0.0, 0.0, 600.0));
    assert!(r.passed);
    assert!((r.min_margin(CheckKind::Incidence).unwrap() - 90.0).abs() < 1e-9);
    // nearest face is the y side plane through (133, 400) and (260, 800)
    let side = (133.0 * 400.0 + 200.0 * 127.0f64) / (127.0f64.powi(2) + 400.0f64.powi(2)).sqrt();
    assert!((r.min_margin(CheckKind::Frustum).unwrap() - side.min(200.0)).abs() < 1e-9);
    let behind = validate_viewpoint(&scene, &spec, &Vec3::new(0.0, 0.0, -600.0));
    assert!(!behind.passed);
    assert!(!validate_viewpoint(&scene, &spec, &Vec3::new(f64::NAN, 0.0, 0.0)).passed);
}

#[test]
fn probes_outside_every_face_fail() {
    let scene = single_device_scene(f1());
    let p = Plan::new("s1", EulerZyx::new(0.0, 15.0, 0.0)).with_constraints(&[C1, C3]);
    let res = integrate(&scene, &p).unwrap();
    let m = &res.reference().manifold;
    let spec = check_spec(&scene, &p, &res.reference().rotation().unwrap()).unwrap();
    let v = Validator::new(&scene, &spec);
    for i in 0..m.faces.len() {
        let [a, b, c] = m.triangle(i);
        let n = (b - a).cross(&(c - a));
        if n.norm() < 1e-9 {
            continue;
        }
        let probe = (a + b + c) / 3.0 + n.normalize() * 5.0;
        assert!(!v.validate(&probe).passed, "face {i}");
    }
    let inside = membership_oracle(&scene, &spec, &sample_interior(m, 200, 3));
    assert!(inside.iter().all(|&b| b));
}

#[test]
fn pgm_layout() {
    let img = DepthImage {
        width: 16,
        height: 16,
        depth: (0..256).map(|i| if i == 17 { 612.34 } else { 0.0 }).collect(),
        device: "s1".into(),
        pose: Pose6D::identity(),
        tan_x: 0.5,
        tan_y: 0.3,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.pgm");
    img.write_pgm(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let header = b"P5\n16 16\n65535\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 2 * 256);
    let px = &bytes[header.len() + 34..header.len() + 36];
    assert_eq!(u16::from_be_bytes([px[0], px[1]]), 6123);
}

#[test]
fn mc_volume_of_box() {
    let b = centered_box(&Vec3::new(5.0, -3.0, 100.0), &Vec3::new(10.0, 20.0, 30.0));
    // the bounding box is the box itself
    assert!((mc_volume(&b, 2000, 1) - 6000.0).abs() < 1e-9);
    let scene = single_device_scene(f1());
    let res = integrate(&scene, &Plan::new("s1", EulerZyx::new(0.0, 0.0, -10.0))).unwrap();
    let m = &res.reference().manifold;
    let est = mc_volume(m, 200_000, 4);
    assert!((est / m.signed_volume() - 1.0).abs() < 0.01);
    assert_eq!(extreme_vertices(m).len(), 8);
}
