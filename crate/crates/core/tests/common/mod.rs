#![allow(dead_code)]

use cspace_core::domain::{
    DeviceLink, DeviceRole, Feature, FeatureKind, ImagingDevice, ImagingParams, RangeSensor, RigidBody, Scene,
};
use cspace_geom::shapes::icosahedron;
use cspace_geom::{EulerZyx, Pose6D, Vec3};
use std::path::PathBuf;

pub fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

pub fn s1() -> ImagingDevice {
    ImagingDevice::new(
        "s1",
        ImagingParams::from_fov(400.0, 800.0, 51.5, 35.5).with_planes((396.0, 266.0), (780.0, 520.0)),
        Pose6D::translation_only(Vec3::new(0.0, 0.0, -602.0)),
    )
}

pub fn s2() -> ImagingDevice {
    let mut d = ImagingDevice::new(
        "s2",
        ImagingParams::from_fov(200.0, 1000.0, 70.8, 43.6).with_planes((284.0, 160.0), (1422.0, 800.0)),
        Pose6D::translation_only(Vec3::new(0.0, 0.0, -600.0)),
    );
    d.role = DeviceRole::Projector;
    d
}

pub fn comet(devices: Vec<ImagingDevice>, max_incidence_deg: f64) -> RangeSensor {
    RangeSensor { id: "comet".into(), devices, flange_mount: Pose6D::identity(), max_incidence_deg }
}

pub fn f1() -> Feature {
    Feature::flat("f1", Pose6D::identity(), 50.0)
}

pub fn f1_pocket() -> Feature {
    Feature { id: "f1*".into(), frame: Pose6D::identity(), side_length_mm: 50.0, height_mm: 30.0, kind: FeatureKind::Concave }
}

pub fn single_device_scene(feature: Feature) -> Scene {
    Scene { features: vec![feature], sensors: vec![comet(vec![s1()], 90.0)], ..Scene::default() }
}

pub fn kappa1() -> RigidBody {
    RigidBody {
        id: "k1".into(),
        mesh: icosahedron(&Vec3::zeros(), 14.0),
        pose: Pose6D::translation_only(Vec3::new(-67.5, 0.0, 240.0)),
    }
}

/// s1 and s2 of the fringe-projection sensor with the projector's working
/// distance clipped.
pub fn bistatic_scene(z_clip: (f64, f64)) -> Scene {
    let mut d2 = s2();
    d2.accuracy_z_mm = Some(z_clip);
    Scene {
        features: vec![f1()],
        sensors: vec![comet(vec![s1(), d2], 90.0)],
        device_links: vec![DeviceLink {
            from: "s1".into(),
            to: "s2".into(),
            pose: Pose6D::new(Vec3::new(217.0, 0.0, 8.0), EulerZyx::new(0.0, -20.0, 0.0)),
        }],
        ..Scene::default()
    }
}
