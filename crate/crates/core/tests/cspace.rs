mod common;

use approx::assert_abs_diff_eq;
use common::*;
use cspace_core::cspace::*;
use cspace_core::domain::{Feature, FeatureKind, RobotWorkspace, Scene};
use cspace_core::integrate::{check_spec, device_check_spec, integrate, orientation_base, Plan};
use cspace_core::joint::{c8_workspace, c9_multifeature};
use cspace_core::scaling::*;
use cspace_core::verify::{membership_oracle, sample_interior, CheckKind, CheckSpec, Validator};
use cspace_core::{ConstrainedSpace, CspaceError};
use cspace_geom::shapes::centered_box;
use cspace_geom::{EulerZyx, IndexedMesh, Manifold, Pose6D, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ConstraintTag::*;

fn vertex_sets_match(a: &[Vec3], b: &[Vec3], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|p| b.iter().any(|q| (p - q).norm() <= tol))
}

fn plan(e: EulerZyx, tags: &[ConstraintTag]) -> Plan {
    Plan::new("s1", e).with_constraints(tags)
}

fn c1_for(f: &Feature, e: EulerZyx) -> ConstrainedSpace {
    let d = s1();
    c1_extreme(&f.viewing_frame(&Pose6D::identity()), &d.params.frustum().unwrap(), &e, &Reference::lens(&d))
}

fn fov() -> (f64, f64) {
    s1().params.frustum().unwrap().effective_fov()
}

#[test]
fn c1_null_rotation_flips_signs() {
    let d = s1();
    let fr = d.params.frustum().unwrap();
    let c1 = c1_extreme(&Pose6D::identity(), &fr, &EulerZyx::ZERO, &Reference::lens(&d));
    let k = fr.vertices.iter().position(|v| (v - Vec3::new(390.0, 260.0, 800.0)).norm() < 1e-12).unwrap();
    assert!((c1.manifold.vertices[k] - Vec3::new(-390.0, -260.0, -800.0)).norm() < 1e-12);
    assert!(c1.manifold.is_watertight());
    assert!(c1.manifold.signed_volume() > 0.0);
}

#[test]
fn c1_point_feature_vertices_sit_on_frustum_boundary() {
    let scene = single_device_scene(Feature::flat("f0", Pose6D::identity(), 0.0));
    let e = EulerZyx::new(170.0, 5.0, 45.0);
    let p = plan(e, &[C1]);
    let res = integrate(&scene, &p).unwrap();
    let m = &res.reference().manifold;
    assert_eq!(m.vertices.len(), 8);
    let spec = check_spec(&scene, &p, &(orientation_base(&scene) * e.matrix())).unwrap();
    let v = Validator::new(&scene, &spec);
    for p in &m.vertices {
        let r = v.validate(p);
        assert!(r.passed);
        assert!(r.min_margin(CheckKind::Frustum).unwrap().abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tcp_and_lens_spaces_differ_by_rotated_mount(a in -180.0..180.0f64, b in -89.0..89.0f64, g in -180.0..180.0f64) {
        let d = s1();
        let fr = d.params.frustum().unwrap();
        let e = EulerZyx::new(a, b, g);
        let lens = c1_extreme(&Pose6D::identity(), &fr, &e, &Reference::lens(&d));
        let tcp = c1_extreme(&Pose6D::identity(), &fr, &e, &Reference::tcp(&d));
        let shift = e.matrix() * Vec3::new(0.0, 0.0, -602.0);
        for (p, q) in lens.manifold.vertices.iter().zip(&tcp.manifold.vertices) {
            prop_assert!(((p - shift) - q).norm() < 1e-9);
        }
    }

    #[test]
    fn homeomorphism_matches_extreme_and_keeps_volume(a in -180.0..180.0f64, b in -89.0..89.0f64, g in -180.0..180.0f64,
                                                      x in -300.0..300.0f64, tcp in any::<bool>()) {
        let d = s1();
        let fr = d.params.frustum().unwrap();
        let e = EulerZyx::new(a, b, g);
        let frame = Pose6D::new(Vec3::new(x, -x / 2.0, 40.0), EulerZyx::new(g, 0.0, 0.0));
        let r = if tcp { Reference::tcp(&d) } else { Reference::lens(&d) };
        let one = c1_extreme(&frame, &fr, &e, &r);
        let two = c1_homeomorphism(&frame, &fr, &e, &r);
        prop_assert!(vertex_sets_match(&one.manifold.vertices, &two.manifold.vertices, 1e-6));
        let v = fr.manifold().signed_volume();
        prop_assert!((one.volume() - v).abs() < 1e-6 * v);
        prop_assert!((two.volume() - v).abs() < 1e-6 * v);
    }
}

#[test]
fn c2_single_orientation_equals_c1() {
    let d = s1();
    let fr = d.params.frustum().unwrap();
    let e = EulerZyx::new(10.0, -5.0, 5.0);
    let c1 = c1_extreme(&Pose6D::identity(), &fr, &e, &Reference::lens(&d));
    let c2 = c2_orientation_range(&Pose6D::identity(), &fr, &OrientationRange::fixed(e), &Reference::lens(&d)).unwrap();
    assert!(vertex_sets_match(&c1.manifold.vertices, &c2.manifold.vertices, 1e-9));
}

#[test]
fn c2_27_orientations_keep_feature_at_all_vertices() {
    let scene = single_device_scene(Feature::flat("f0", Pose6D::identity(), 0.0));
    let mut p = plan(EulerZyx::ZERO, &[C1, C2]);
    p.range = Some(OrientationRange::new(vec![-10.0, 0.0, 10.0], vec![-5.0, 0.0, 5.0], vec![-5.0, 0.0, 5.0]).unwrap());
    let res = integrate(&scene, &p).unwrap();
    let s = res.reference();
    assert!(!s.is_empty());
    assert_eq!(s.orientations.len(), 27);
    let spec = device_check_spec(&scene, &p, "s1").unwrap();
    assert_eq!(spec.rotations.len(), 27);
    let v = Validator::new(&scene, &spec);
    for q in &s.manifold.vertices {
        let r = v.validate(q);
        assert!(r.passed, "{q:?} margin {:?}", r.min_margin(CheckKind::Frustum));
    }
}

#[test]
fn c2_wide_range_can_be_empty() {
    let d = s1();
    let fr = d.params.frustum().unwrap();
    let r = OrientationRange::new(vec![0.0], vec![-30.0, 30.0], vec![-25.0, 25.0]).unwrap();
    let c2 = c2_orientation_range(&Pose6D::identity(), &fr, &r, &Reference::lens(&d)).unwrap();
    assert!(c2.is_empty());
}

#[test]
fn orientation_range_stepping() {
    assert_eq!(OrientationRange::stepped(-5.0, 5.0, 2.5), vec![-5.0, -2.5, 0.0, 2.5, 5.0]);
    assert_eq!(OrientationRange::stepped(-5.0, 5.0, 3.0), vec![-5.0, -2.0, 1.0, 4.0, 5.0]);
    assert!(OrientationRange::new(vec![], vec![0.0], vec![0.0]).is_err());
    assert_eq!(OrientationRange::new(vec![1.0, -1.0, 1.0], vec![0.0], vec![0.0]).unwrap().alpha_z, vec![-1.0, 1.0]);
}

#[test]
fn c3_zero_length_feature_is_c1() {
    let f0 = Feature::flat("f0", Pose6D::identity(), 0.0);
    for e in [EulerZyx::ZERO, EulerZyx::new(15.0, 0.0, 0.0), EulerZyx::new(0.0, 15.0, 0.0)] {
        let c1 = c1_for(&f0, e);
        let c3 = c3_scaling(&c1, &f0, &e, fov()).unwrap();
        assert!(vertex_sets_match(&c1.manifold.vertices, &c3.manifold.vertices, 1e-12));
    }
}

#[test]
fn c3_null_rotation_moves_every_vertex_25mm() {
    let s = c3_deltas(&f1(), &EulerZyx::ZERO, fov()).unwrap();
    assert!(s.deltas.iter().all(|d| *d == Vec3::new(25.0, 25.0, 0.0)));
    let c1 = c1_for(&f1(), EulerZyx::ZERO);
    let c3 = c3_scaling(&c1, &f1(), &EulerZyx::ZERO, fov()).unwrap();
    let (b1, b3) = (c1.basis.unwrap(), c3.basis.unwrap());
    for k in 0..8 {
        let d = b3.local[k] - b1.local[k];
        assert_abs_diff_eq!(d.x.abs(), 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.y.abs(), 25.0, epsilon = 1e-12);
        // towards the optical axis
        assert!(b3.local[k].x.abs() < b1.local[k].x.abs());
    }
}

#[test]
fn c3_z_rotation_delta() {
    let s = c3_deltas(&f1(), &EulerZyx::new(15.0, 0.0, 0.0), fov()).unwrap();
    let want = 25.0 * (15f64.to_radians().cos() + 15f64.to_radians().sin());
    assert_abs_diff_eq!(want, 30.62, epsilon = 0.005);
    assert!(s.deltas.iter().all(|d| (d.x - want).abs() < 1e-12 && (d.y - want).abs() < 1e-12 && d.z == 0.0));
    // a quarter turn maps the square onto itself
    let q = c3_deltas(&f1(), &EulerZyx::new(105.0, 0.0, 0.0), fov()).unwrap();
    assert!((q.deltas[0].x - want).abs() < 1e-9);
}

#[test]
fn c3_y_rotation_aux_lengths() {
    let a = aux_lengths(50.0, 15.0, 51.5, 35.5);
    assert_abs_diff_eq!(a.rho_z, 6.47, epsilon = 0.005);
    assert_abs_diff_eq!(a.rho, 24.15, epsilon = 0.005);
    assert_abs_diff_eq!(a.vs, 6.24, epsilon = 0.005);
    assert_abs_diff_eq!(a.lambda, 17.91, epsilon = 0.005);
    assert_abs_diff_eq!(a.sigma, 30.39, epsilon = 0.005);
    let s = c3_deltas(&f1(), &EulerZyx::new(0.0, 15.0, 0.0), (51.5, 35.5)).unwrap();
    let lam_rho_sig = [a.lambda, a.rho, a.sigma];
    for d in &s.deltas {
        assert_abs_diff_eq!(d.z, a.rho_z, epsilon = 1e-12);
        assert!(lam_rho_sig.iter().any(|v| (v - d.x).abs() < 1e-12));
    }
}

#[test]
fn c3_pocket_back_vertices() {
    let s = c3_deltas(&f1_pocket(), &EulerZyx::ZERO, (51.5, 35.5)).unwrap();
    let want = 30.0 * 25.75f64.to_radians().tan() + 25.0;
    assert_abs_diff_eq!(want, 39.47, epsilon = 0.005);
    // far vertices 3, 4, 7, 8
    for k in [2, 3, 6, 7] {
        assert_abs_diff_eq!(s.deltas[k].x, want, epsilon = 1e-12);
        assert_abs_diff_eq!(s.deltas[k].z, 30.0, epsilon = 1e-12);
    }
    for k in [0, 1, 4, 5] {
        assert_eq!(s.deltas[k], Vec3::new(25.0, 25.0, 0.0));
    }
}

#[test]
fn c3_convex_front_vertices_are_fully_scaled() {
    let f = Feature { id: "b".into(), frame: Pose6D::identity(), side_length_mm: 40.0, height_mm: 40.0, kind: FeatureKind::Convex };
    let s = c3_deltas(&f, &EulerZyx::ZERO, (51.5, 35.5)).unwrap();
    assert!(s.deltas[0].z > 0.0);
    assert_eq!(s.deltas[2].z, 0.0);
    assert_eq!(s.deltas[0].x, s.deltas[2].x);
}

#[test]
fn c3_rejects_compound_and_tilted_3d() {
    assert!(matches!(c3_deltas(&f1(), &EulerZyx::new(5.0, 5.0, 0.0), fov()), Err(CspaceError::UnsupportedOrientation(_))));
    assert!(matches!(c3_deltas(&f1_pocket(), &EulerZyx::new(0.0, 5.0, 0.0), fov()), Err(CspaceError::UnsupportedOrientation(_))));
    let bad = Feature::flat("bad", Pose6D::identity(), -1.0);
    assert!(matches!(c3_deltas(&bad, &EulerZyx::ZERO, fov()), Err(CspaceError::InvalidFeature(_))));
}

#[test]
fn c3_closed_form_matches_erosion() {
    let f = f1();
    let fw = f.world_frame(&Pose6D::identity());
    for e in [
        EulerZyx::ZERO,
        EulerZyx::new(15.0, 0.0, 0.0),
        EulerZyx::new(-40.0, 0.0, 0.0),
        EulerZyx::new(0.0, 15.0, 0.0),
        EulerZyx::new(0.0, -20.0, 0.0),
        EulerZyx::new(0.0, 0.0, -10.0),
        EulerZyx::new(0.0, 0.0, 18.0),
    ] {
        let c1 = c1_for(&f, e);
        let table = c3_scaling(&c1, &f, &e, fov()).unwrap();
        let eroded = c3_erosion(&c1, &f, &fw).unwrap();
        let (vt, ve) = (table.volume(), eroded.volume());
        assert!((vt - ve).abs() <= 1e-6 * ve, "{e:?}: table {vt} erosion {ve}");
        assert!(vertex_sets_match(&table.manifold.vertices, &eroded.manifold.vertices, 1e-6), "{e:?}");
    }
}

#[test]
fn scaling_sum_examples() {
    let c1 = c1_for(&f1(), EulerZyx::ZERO);
    let same = apply_scaling_sum(&c1, &[]).unwrap();
    assert_eq!(same.manifold.vertices, c1.manifold.vertices);

    let eps = Vec3::new(70.0, 70.0, 50.0);
    let c4 = apply_scaling_sum(&c1, &[c4_deltas(8, &eps)]).unwrap();
    let (b1, b4) = (c1.basis.as_ref().unwrap(), c4.basis.as_ref().unwrap());
    for k in 0..8 {
        let d = b4.local[k] - b1.local[k];
        assert_eq!(d.abs(), eps);
        assert!(b4.local[k].x.abs() < b1.local[k].x.abs());
    }
    assert!(c4.has(C4));

    let fr = s1().params.frustum().unwrap();
    let c5 = apply_scaling_sum(&c1, &[c5_deltas(&fr, 500.0, 700.0).unwrap()]).unwrap();
    let b5 = c5.basis.as_ref().unwrap();
    for k in 0..8 {
        let z = b5.local[k].z;
        assert!((z - 500.0).abs() < 1e-9 || (z - 700.0).abs() < 1e-9, "{z}");
        assert_abs_diff_eq!((b5.local[k].z - b1.local[k].z).abs(), 100.0, epsilon = 1e-9);
    }
    // still on the original lateral edges: width at 500 mm
    let w = 396.0 + (780.0 - 396.0) * 0.25;
    assert!(b5.local.iter().any(|v| (v.x.abs() * 2.0 - w).abs() < 1e-9));

    assert!(matches!(
        apply_scaling_sum(&c1, &[c4_deltas(12, &eps)]),
        Err(CspaceError::VertexCountMismatch { expected: 8, got: 12 })
    ));
    assert!(matches!(
        apply_scaling_sum(&c1, &[c4_deltas(8, &Vec3::new(300.0, 10.0, 10.0))]),
        Err(CspaceError::CollapsedSpace(_))
    ));
}

#[test]
fn c8_examples() {
    let c1 = c1_for(&f1(), EulerZyx::ZERO);
    let big = centered_box(&Vec3::zeros(), &Vec3::repeat(1e4));
    let same = c8_workspace(&c1, &big).unwrap();
    assert_abs_diff_eq!(same.volume(), c1.volume(), epsilon = 1e-6 * c1.volume());
    assert!(same.has(C8));
    let far = centered_box(&Vec3::new(5e4, 0.0, 0.0), &Vec3::repeat(100.0));
    assert!(c8_workspace(&c1, &far).unwrap().is_empty());
}

#[test]
fn c8_half_shell_volume_agrees_with_oracle() {
    let mut scene = single_device_scene(f1());
    scene.workspace = Some(RobotWorkspace::half_shell(Vec3::new(-1300.0, 0.0, -400.0), 1000.0, 1450.0, 96, 24).unwrap());
    let p = plan(EulerZyx::ZERO, &[C1, C3, C8]);
    let s = integrate(&scene, &p).unwrap();
    let free = integrate(&scene, &plan(EulerZyx::ZERO, &[C1, C3])).unwrap();
    let (vol, vol3) = (s.reference().volume(), free.reference().volume());
    assert!(vol > 0.0 && vol < 0.95 * vol3, "{vol} vs {vol3}");
    // hit-or-miss inside the C3 box against the manifold-free oracle
    let spec = check_spec(&scene, &p, &s.reference().rotation().unwrap()).unwrap();
    let (lo, hi) = free.reference().manifold.bbox().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 150_000;
    let probes: Vec<Vec3> =
        (0..n).map(|_| Vec3::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y), rng.gen_range(lo.z..hi.z))).collect();
    let hits = membership_oracle(&scene, &spec, &probes).iter().filter(|&&b| b).count();
    let est = hits as f64 / n as f64 * (hi - lo).product();
    assert!((est / vol - 1.0).abs() < 0.01, "estimate {est} manifold {vol}");
}

fn f2_near() -> Feature {
    Feature::flat("f2", Pose6D::translation_only(Vec3::new(75.0, 150.0, 0.0)), 20.0)
}

#[test]
fn c9_examples() {
    let e = EulerZyx::new(0.0, 0.0, -10.0);
    let one = c1_for(&f1(), e);
    let joined = c9_multifeature(std::slice::from_ref(&one)).unwrap();
    assert_eq!(joined.manifold.vertices, one.manifold.vertices);

    let scene = Scene { features: vec![f1(), f2_near()], ..single_device_scene(f1()) };
    let p = plan(e, &[C1, C3, C9]);
    let res = integrate(&scene, &p).unwrap();
    assert!(!res.reference().is_empty());
    let spec = check_spec(&scene, &p, &res.reference().rotation().unwrap()).unwrap();
    let v = Validator::new(&scene, &spec);
    for q in &res.reference().manifold.vertices {
        assert!(v.validate(q).passed);
    }

    // further apart than the far plane is wide
    let apart = Feature::flat("fx", Pose6D::translation_only(Vec3::new(900.0, 0.0, 0.0)), 20.0);
    let scene = Scene { features: vec![f1(), apart], ..single_device_scene(f1()) };
    let res = integrate(&scene, &plan(EulerZyx::ZERO, &[C1, C3, C9])).unwrap();
    assert!(res.reference().is_empty());
    assert_eq!(res.emptied_by.unwrap().0, C9);
}

#[test]
fn integrate_single_point_feature_is_c1() {
    let f0 = Feature::flat("f0", Pose6D::identity(), 0.0);
    let scene = single_device_scene(f0.clone());
    let e = EulerZyx::new(20.0, -10.0, 5.0);
    let res = integrate(&scene, &Plan::new("s1", e)).unwrap();
    let c1 = c1_for(&f0, e);
    assert!(vertex_sets_match(&res.reference().manifold.vertices, &c1.manifold.vertices, 1e-9));
}

#[test]
fn interior_samples_pass_strictly() {
    let scene = single_device_scene(f1());
    let e = EulerZyx::new(0.0, 15.0, 0.0);
    let p = plan(e, &[C1, C3]);
    let res = integrate(&scene, &p).unwrap();
    let spec = check_spec(&scene, &p, &res.reference().rotation().unwrap()).unwrap();
    let v = Validator::new(&scene, &spec);
    let pts = sample_interior(&res.reference().manifold, 1000, 9);
    assert_eq!(pts.len(), 1000);
    for q in &pts {
        let r = v.validate(q);
        assert!(r.passed && r.min_margin(CheckKind::Frustum).unwrap() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adding_constraints_never_grows_volume(axis in 0usize..4, angle in -30.0..30.0f64, eps in 0.0..40.0f64, z0 in 420.0..560.0f64) {
        let e = match axis {
            0 => EulerZyx::ZERO,
            1 => EulerZyx::new(angle, 0.0, 0.0),
            2 => EulerZyx::new(0.0, angle, 0.0),
            _ => EulerZyx::new(0.0, 0.0, angle),
        };
        let mut scene = single_device_scene(f1());
        scene.error_budget.robot_mm = [eps, eps, eps / 2.0];
        scene.sensors[0].devices[0].accuracy_z_mm = Some((z0, 760.0));
        scene.workspace = Some(RobotWorkspace::half_shell(Vec3::new(-1300.0, 0.0, -400.0), 1000.0, 1500.0, 48, 12).unwrap());
        let mut prev = f64::INFINITY;
        let mut tags = vec![C1];
        for t in [C3, C4, C5, C8] {
            tags.push(t);
            let v = integrate(&scene, &plan(e, &tags)).unwrap().reference().volume();
            prop_assert!(v <= prev * (1.0 + 1e-9), "{t}: {v} > {prev}");
            prev = v;
        }
    }
}

/// 20^3 grid over 1.2x the bounding box: manifold membership must imply
/// oracle membership, and the oracle may not accept more than 10% extra.
fn grid_agreement(scene: &Scene, space: &ConstrainedSpace, spec: &CheckSpec) -> (usize, usize, usize) {
    let (lo, hi) = space.manifold.bbox().unwrap();
    let c = (lo + hi) / 2.0;
    let half = (hi - lo) * 0.6;
    let n = 20;
    let mut probes = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let t = |m: usize| (m as f64 + 0.5) / n as f64 * 2.0 - 1.0;
                probes.push(c + Vec3::new(half.x * t(i), half.y * t(j), half.z * t(k)));
            }
        }
    }
    let idx = IndexedMesh::new(space.manifold.clone());
    let oracle = membership_oracle(scene, spec, &probes);
    let (mut unsound, mut oracle_only, mut oracle_true) = (0, 0, 0);
    for (p, &o) in probes.iter().zip(&oracle) {
        let m = idx.contains_point(p);
        unsound += (m && !o) as usize;
        oracle_only += (o && !m) as usize;
        oracle_true += o as usize;
    }
    (unsound, oracle_only, oracle_true)
}

#[test]
fn grid_soundness_and_tightness() {
    let f0 = Feature::flat("f0", Pose6D::identity(), 0.0);
    let mut c5_scene = single_device_scene(f1());
    c5_scene.sensors[0].devices[0].accuracy_z_mm = Some((500.0, 700.0));
    let mut c4_scene = single_device_scene(f1());
    c4_scene.error_budget.robot_mm = [70.0, 70.0, 50.0];
    let mut c8_scene = single_device_scene(f1());
    c8_scene.workspace = Some(RobotWorkspace::half_shell(Vec3::new(-1300.0, 0.0, -400.0), 1000.0, 1450.0, 96, 24).unwrap());
    let c9_scene = Scene { features: vec![f1(), f2_near()], ..single_device_scene(f1()) };
    let mut c2_plan = plan(EulerZyx::ZERO, &[C1, C2]);
    c2_plan.range = Some(OrientationRange::new(vec![-10.0, 0.0, 10.0], vec![-5.0, 0.0, 5.0], vec![-5.0, 0.0, 5.0]).unwrap());
    let cases: Vec<(&str, Scene, Plan)> = vec![
        ("C1", single_device_scene(f0.clone()), plan(EulerZyx::new(170.0, 5.0, 45.0), &[C1])),
        ("C2", single_device_scene(f0), c2_plan),
        ("C3 null", single_device_scene(f1()), plan(EulerZyx::ZERO, &[C1, C3])),
        ("C3 alpha", single_device_scene(f1()), plan(EulerZyx::new(15.0, 0.0, 0.0), &[C1, C3])),
        ("C3 beta", single_device_scene(f1()), plan(EulerZyx::new(0.0, 15.0, 0.0), &[C1, C3])),
        ("C3 gamma", single_device_scene(f1()), plan(EulerZyx::new(0.0, 0.0, -10.0), &[C1, C3])),
        ("C3 pocket", single_device_scene(f1_pocket()), plan(EulerZyx::ZERO, &[C1, C3])),
        ("C4", c4_scene, plan(EulerZyx::ZERO, &[C1, C3, C4])),
        ("C5", c5_scene, plan(EulerZyx::ZERO, &[C1, C3, C5])),
        ("C8", c8_scene, plan(EulerZyx::ZERO, &[C1, C3, C8])),
        ("C9", c9_scene, plan(EulerZyx::new(0.0, 0.0, -10.0), &[C1, C3, C9])),
    ];
    for (name, scene, p) in cases {
        let res = integrate(&scene, &p).unwrap();
        let spec = device_check_spec(&scene, &p, "s1").unwrap();
        let (unsound, extra, truth) = grid_agreement(&scene, res.reference(), &spec);
        assert_eq!(unsound, 0, "{name}: {unsound} grid cells inside the manifold fail the oracle");
        assert!(truth > 0, "{name}: oracle accepts nothing");
        let ratio = extra as f64 / truth as f64;
        assert!(ratio <= 0.10, "{name}: conservativeness {ratio:.3}");
    }
}

#[test]
fn empty_result_names_first_emptying_constraint() {
    let mut scene = single_device_scene(f1());
    scene.workspace = Some(RobotWorkspace::from_mesh(centered_box(&Vec3::new(1e5, 0.0, 0.0), &Vec3::repeat(10.0))).unwrap());
    let res = integrate(&scene, &plan(EulerZyx::ZERO, &[C1, C3, C8])).unwrap();
    assert!(res.is_empty());
    assert_eq!(res.emptied_by.unwrap().0, C8);
    let _ = Manifold::empty();
}
