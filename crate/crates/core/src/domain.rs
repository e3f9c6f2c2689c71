//! Robot vision system domain: imaging devices and their frusta, range
//! sensors, features, occluders, the robot workspace and the kinematic
//! chain tying them together.

use crate::error::{CspaceError, Result};
use cspace_geom::pose::rot_x;
use cspace_geom::shapes::quads_to_triangles;
use cspace_geom::{IndexedMesh, Manifold, Mat3, Pose6D, Vec3};
use std::collections::{BTreeMap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSize {
    pub width_mm: f64,
    pub height_mm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagingParams {
    pub near_mm: f64,
    pub far_mm: f64,
    pub fov_x_deg: f64,
    pub fov_y_deg: f64,
    pub near_plane: Option<PlaneSize>,
    pub far_plane: Option<PlaneSize>,
    /// Optional middle plane turning the frustum into a 12-vertex prismatoid.
    pub middle: Option<(f64, PlaneSize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthPlane {
    Near,
    Middle,
    Far,
}

/// Corner signs of a frustum vertex in the lens frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexRole {
    pub sx: f64,
    pub sy: f64,
    pub plane: DepthPlane,
}

impl VertexRole {
    /// +1 for near vertices (inward is +z), -1 for far ones.
    pub fn sz(&self) -> f64 {
        match self.plane {
            DepthPlane::Far => -1.0,
            _ => 1.0,
        }
    }
}

/// Vertex order: 1 (-x,+y,near), 2 (+x,+y,near), 3 (+x,+y,far),
/// 4 (-x,+y,far), then 5..8 the same at -y; optional middle plane
/// vertices 9..12 as (-,+), (+,+), (+,-), (-,-).
pub const FRUSTUM_ROLES: [(f64, f64, DepthPlane); 8] = [
    (-1.0, 1.0, DepthPlane::Near),
    (1.0, 1.0, DepthPlane::Near),
    (1.0, 1.0, DepthPlane::Far),
    (-1.0, 1.0, DepthPlane::Far),
    (-1.0, -1.0, DepthPlane::Near),
    (1.0, -1.0, DepthPlane::Near),
    (1.0, -1.0, DepthPlane::Far),
    (-1.0, -1.0, DepthPlane::Far),
];

/// Frustum in the lens frame with per-vertex roles.
#[derive(Debug, Clone, PartialEq)]
pub struct Frustum {
    pub vertices: Vec<Vec3>,
    pub roles: Vec<VertexRole>,
    pub faces: Vec<[usize; 3]>,
}

impl Frustum {
    pub fn manifold(&self) -> Manifold {
        Manifold::new(self.vertices.clone(), self.faces.clone())
    }

    pub fn near_depth(&self) -> f64 {
        self.vertices[0].z
    }

    pub fn far_depth(&self) -> f64 {
        self.vertices[2].z
    }

    /// Half extents `(a, b)` of the near and far rectangles.
    pub fn half_extents(&self) -> ((f64, f64), (f64, f64)) {
        let n = self.vertices[1];
        let f = self.vertices[2];
        ((n.x, n.y), (f.x, f.y))
    }

    /// Full apertures (deg) implied by the side slopes between near and far.
    pub fn effective_fov(&self) -> (f64, f64) {
        let ((an, bn), (af, bf)) = self.half_extents();
        let dz = self.far_depth() - self.near_depth();
        (2.0 * ((af - an) / dz).atan().to_degrees(), 2.0 * ((bf - bn) / dz).atan().to_degrees())
    }

    /// Largest half-angle tangents seen from the lens, over all vertices.
    pub fn max_tangents(&self) -> (f64, f64) {
        self.vertices.iter().fold((0.0f64, 0.0f64), |(tx, ty), v| (tx.max(v.x.abs() / v.z), ty.max(v.y.abs() / v.z)))
    }
}

impl ImagingParams {
    pub fn from_fov(near_mm: f64, far_mm: f64, fov_x_deg: f64, fov_y_deg: f64) -> Self {
        ImagingParams { near_mm, far_mm, fov_x_deg, fov_y_deg, near_plane: None, far_plane: None, middle: None }
    }

    pub fn with_planes(mut self, near: (f64, f64), far: (f64, f64)) -> Self {
        self.near_plane = Some(PlaneSize { width_mm: near.0, height_mm: near.1 });
        self.far_plane = Some(PlaneSize { width_mm: far.0, height_mm: far.1 });
        self
    }

    pub fn depth_of_field(&self) -> f64 {
        self.far_mm - self.near_mm
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CspaceError::InvalidParams(m));
        let finite = [self.near_mm, self.far_mm, self.fov_x_deg, self.fov_y_deg].iter().all(|v| v.is_finite());
        if !finite {
            return bad("non-finite value".into());
        }
        if !(self.near_mm > 0.0 && self.near_mm < self.far_mm) {
            return bad(format!("need 0 < near ({}) < far ({})", self.near_mm, self.far_mm));
        }
        for (name, a) in [("fov_x", self.fov_x_deg), ("fov_y", self.fov_y_deg)] {
            if !(a > 0.0 && a < 180.0) {
                return bad(format!("{name} = {a} outside (0, 180) deg"));
            }
        }
        for p in [self.near_plane, self.far_plane].iter().flatten() {
            if !(p.width_mm > 0.0 && p.height_mm > 0.0) {
                return bad("plane dimensions must be positive".into());
            }
        }
        if self.near_plane.is_some() != self.far_plane.is_some() {
            return bad("give both near and far plane dimensions or neither".into());
        }
        if let (Some(n), Some(f)) = (self.near_plane, self.far_plane) {
            if !(n.width_mm < f.width_mm && n.height_mm < f.height_mm) {
                return bad("near plane must be smaller than far plane".into());
            }
        }
        if let Some((h, s)) = self.middle {
            if !(h > self.near_mm && h < self.far_mm && s.width_mm > 0.0 && s.height_mm > 0.0) {
                return bad("middle plane must lie strictly between near and far".into());
            }
        }
        Ok(())
    }

    fn half_extent_at(&self, plane: Option<PlaneSize>, depth: f64) -> (f64, f64) {
        match plane {
            Some(p) => (p.width_mm / 2.0, p.height_mm / 2.0),
            None => (
                depth * (self.fov_x_deg / 2.0).to_radians().tan(),
                depth * (self.fov_y_deg / 2.0).to_radians().tan(),
            ),
        }
    }

    /// Frustum in the lens frame. Explicit plane sizes win over FOV angles.
    pub fn frustum(&self) -> Result<Frustum> {
        self.validate()?;
        let (an, bn) = self.half_extent_at(self.near_plane, self.near_mm);
        let (af, bf) = self.half_extent_at(self.far_plane, self.far_mm);
        let mut vertices = Vec::new();
        let mut roles = Vec::new();
        for (sx, sy, plane) in FRUSTUM_ROLES {
            let (a, b, z) = match plane {
                DepthPlane::Near => (an, bn, self.near_mm),
                _ => (af, bf, self.far_mm),
            };
            vertices.push(Vec3::new(sx * a, sy * b, z));
            roles.push(VertexRole { sx, sy, plane });
        }
        let faces = match self.middle {
            None => quads_to_triangles(&[[0, 1, 5, 4], [3, 7, 6, 2], [0, 3, 2, 1], [4, 5, 6, 7], [1, 2, 6, 5], [0, 4, 7, 3]]),
            Some((h, s)) => {
                let (am, bm) = (s.width_mm / 2.0, s.height_mm / 2.0);
                for (sx, sy) in [(-1.0, 1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                    vertices.push(Vec3::new(sx * am, sy * bm, h));
                    roles.push(VertexRole { sx, sy, plane: DepthPlane::Middle });
                }
                quads_to_triangles(&[
                    [0, 1, 5, 4],
                    [3, 7, 6, 2],
                    [0, 8, 9, 1],
                    [8, 3, 2, 9],
                    [1, 9, 10, 5],
                    [9, 2, 6, 10],
                    [4, 5, 10, 11],
                    [11, 10, 6, 7],
                    [0, 4, 11, 8],
                    [8, 11, 7, 3],
                ])
            }
        };
        Ok(Frustum { vertices, roles, faces })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceRole {
    Camera,
    Projector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagingDevice {
    pub id: String,
    pub role: DeviceRole,
    pub params: ImagingParams,
    /// Lens pose relative to the sensor TCP (`T_TCP->s_t`).
    pub mount: Pose6D,
    /// Working-distance bounds `(z_min, z_max)` in the lens frame where the
    /// device meets its accuracy spec.
    pub accuracy_z_mm: Option<(f64, f64)>,
}

impl ImagingDevice {
    pub fn new(id: &str, params: ImagingParams, mount: Pose6D) -> Self {
        ImagingDevice { id: id.to_string(), role: DeviceRole::Camera, params, mount, accuracy_z_mm: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeSensor {
    pub id: String,
    pub devices: Vec<ImagingDevice>,
    /// TCP pose relative to the robot flange (`T_flange->TCP`).
    pub flange_mount: Pose6D,
    pub max_incidence_deg: f64,
}

impl RangeSensor {
    pub fn validate(&self) -> Result<()> {
        if self.devices.is_empty() {
            return Err(CspaceError::InvalidParams(format!("sensor {} has no devices", self.id)));
        }
        if !(self.max_incidence_deg > 0.0 && self.max_incidence_deg <= 90.0) {
            return Err(CspaceError::InvalidParams(format!("max incidence {} outside (0, 90]", self.max_incidence_deg)));
        }
        for (i, d) in self.devices.iter().enumerate() {
            if self.devices[..i].iter().any(|o| o.id == d.id) {
                return Err(CspaceError::InvalidParams(format!("duplicate device id {}", d.id)));
            }
            if cspace_geom::pose::orthonormality_error(&d.mount.rotation) > 1e-9 {
                return Err(CspaceError::InvalidParams(format!("mount of {} is not a rotation", d.id)));
            }
            d.params.validate()?;
        }
        Ok(())
    }
}

/// Frustum of a device posed in the world by its lens pose.
pub fn frustum_space(device: &ImagingDevice, sensor_pose: &Pose6D) -> Result<Manifold> {
    Ok(device.params.frustum()?.manifold().transformed(sensor_pose))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Flat,
    Concave,
    Convex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub id: String,
    /// Pose relative to the object (`T_o->f`); z is the surface normal.
    pub frame: Pose6D,
    pub side_length_mm: f64,
    pub height_mm: f64,
    pub kind: FeatureKind,
}

impl Feature {
    pub fn flat(id: &str, frame: Pose6D, side_length_mm: f64) -> Feature {
        Feature { id: id.to_string(), frame, side_length_mm, height_mm: 0.0, kind: FeatureKind::Flat }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.side_length_mm >= 0.0 && self.height_mm >= 0.0) {
            return Err(CspaceError::InvalidFeature(format!("{}: negative size", self.id)));
        }
        if self.kind != FeatureKind::Flat && self.height_mm <= 0.0 {
            return Err(CspaceError::InvalidFeature(format!("{}: 3-D feature needs a height", self.id)));
        }
        Ok(())
    }

    pub fn is_3d(&self) -> bool {
        self.kind != FeatureKind::Flat && self.height_mm > 0.0
    }

    /// World pose of the feature frame.
    pub fn world_frame(&self, object_pose: &Pose6D) -> Pose6D {
        object_pose.compose(&self.frame)
    }

    /// Frame orientations are expressed against: the feature frame turned
    /// 180 deg about x, so its +z looks down onto the feature.
    pub fn viewing_frame(&self, object_pose: &Pose6D) -> Pose6D {
        let w = self.world_frame(object_pose);
        Pose6D::from_parts(w.translation, w.rotation * rot_x(180.0))
    }

    /// Frame whose z axis is `normal`, x taken from the projection of `x_hint`.
    pub fn frame_from_normal(origin: Vec3, normal: Vec3, x_hint: Vec3) -> Pose6D {
        let z = normal.normalize();
        let mut x = x_hint - z * z.dot(&x_hint);
        if x.norm() < 1e-9 {
            x = Vec3::x() - z * z.x;
            if x.norm() < 1e-9 {
                x = Vec3::y() - z * z.y;
            }
        }
        let x = x.normalize();
        let y = z.cross(&x);
        Pose6D::from_parts(origin, Mat3::from_columns(&[x, y, z]))
    }
}

/// Centre plus four corners of the generalized square feature, in the
/// feature frame. For convex features these sit on the top face.
pub fn feature_surface_points(f: &Feature) -> [Vec3; 5] {
    let h = f.side_length_mm / 2.0;
    let z = if f.kind == FeatureKind::Convex { f.height_mm } else { 0.0 };
    [
        Vec3::new(0.0, 0.0, z),
        Vec3::new(h, h, z),
        Vec3::new(-h, h, z),
        Vec3::new(-h, -h, z),
        Vec3::new(h, -h, z),
    ]
}

/// All points that must lie inside the frustum for the feature to be
/// acquired: surface points plus the far rim of a 3-D feature.
pub fn feature_hull_points(f: &Feature) -> Vec<Vec3> {
    let mut pts = feature_surface_points(f).to_vec();
    if f.is_3d() {
        let h = f.side_length_mm / 2.0;
        let z = match f.kind {
            FeatureKind::Concave => -f.height_mm,
            _ => 0.0,
        };
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
            pts.push(Vec3::new(sx * h, sy * h, z));
        }
    }
    pts
}

/// Incidence angle (deg) between the feature normal and the reversed
/// optical axis; 0 when looking head-on.
pub fn incidence_angle(f_normal: &Vec3, optical_axis: &Vec3) -> f64 {
    (-f_normal.dot(optical_axis)).clamp(-1.0, 1.0).acos().to_degrees()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidBody {
    pub id: String,
    /// Mesh in body coordinates.
    pub mesh: Manifold,
    /// Body pose in the world frame.
    pub pose: Pose6D,
}

impl RigidBody {
    pub fn world_mesh(&self) -> Manifold {
        self.mesh.transformed(&self.pose)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfShell {
    pub center: Vec3,
    pub inner_radius_mm: f64,
    pub outer_radius_mm: f64,
}

impl HalfShell {
    pub fn contains(&self, p: &Vec3) -> bool {
        let r = (p - self.center).norm();
        p.z >= self.center.z && r >= self.inner_radius_mm && r <= self.outer_radius_mm
    }
}

/// Reachable TCP positions, in the world frame.
#[derive(Debug, Clone)]
pub struct RobotWorkspace {
    pub mesh: IndexedMesh,
    pub analytic: Option<HalfShell>,
}

impl RobotWorkspace {
    pub fn from_mesh(mesh: Manifold) -> Result<Self> {
        if !mesh.is_watertight() || mesh.is_empty() {
            return Err(CspaceError::InvalidParams("workspace mesh must be closed and non-empty".into()));
        }
        Ok(RobotWorkspace { mesh: IndexedMesh::new(mesh), analytic: None })
    }

    pub fn half_shell(center: Vec3, inner: f64, outer: f64, n_az: usize, n_el: usize) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(CspaceError::InvalidParams("need 0 < inner radius < outer radius".into()));
        }
        let mesh = cspace_geom::shapes::hollow_half_sphere(&center, inner, outer, n_az, n_el);
        Ok(RobotWorkspace {
            mesh: IndexedMesh::new(mesh),
            analytic: Some(HalfShell { center, inner_radius_mm: inner, outer_radius_mm: outer }),
        })
    }

    pub fn manifold(&self) -> &Manifold {
        &self.mesh.mesh
    }

    pub fn contains(&self, tcp: &Vec3) -> bool {
        self.mesh.contains_point(tcp)
    }
}

/// Rigid offset between two devices' lens frames (`T_from->to`).
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceLink {
    pub from: String,
    pub to: String,
    pub pose: Pose6D,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorBudget {
    pub alignment_mm: [f64; 3],
    pub sensor_model_mm: [f64; 3],
    pub robot_mm: [f64; 3],
}

impl ErrorBudget {
    /// Per-axis total `|e_e| + |e_s| + |e_r|`.
    pub fn total(&self) -> Vec3 {
        Vec3::from_fn(|i, _| self.alignment_mm[i].abs() + self.sensor_model_mm[i].abs() + self.robot_mm[i].abs())
    }

    pub fn is_zero(&self) -> bool {
        self.total() == Vec3::zeros()
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    /// `T_w->o`.
    pub object_pose: Pose6D,
    pub object_mesh: Option<Manifold>,
    pub features: Vec<Feature>,
    pub sensors: Vec<RangeSensor>,
    pub device_links: Vec<DeviceLink>,
    pub occluders: Vec<RigidBody>,
    pub workspace: Option<RobotWorkspace>,
    /// `T_w->r`.
    pub robot_base: Pose6D,
    pub error_budget: ErrorBudget,
}

impl Default for Scene {
    fn default() -> Self {
        Scene {
            object_pose: Pose6D::identity(),
            object_mesh: None,
            features: Vec::new(),
            sensors: Vec::new(),
            device_links: Vec::new(),
            occluders: Vec::new(),
            workspace: None,
            robot_base: Pose6D::identity(),
            error_budget: ErrorBudget::default(),
        }
    }
}

impl Scene {
    pub fn device(&self, id: &str) -> Result<(&RangeSensor, &ImagingDevice)> {
        self.sensors
            .iter()
            .find_map(|s| s.devices.iter().find(|d| d.id == id).map(|d| (s, d)))
            .ok_or_else(|| CspaceError::UnresolvedFrame(format!("unknown device {id}")))
    }

    pub fn feature(&self, id: &str) -> Result<&Feature> {
        self.features
            .iter()
            .find(|f| f.id == id)
            .ok_or_else(|| CspaceError::UnresolvedFrame(format!("unknown feature {id}")))
    }

    pub fn device_ids(&self) -> Vec<String> {
        self.sensors.iter().flat_map(|s| s.devices.iter().map(|d| d.id.clone())).collect()
    }

    /// `T_from->to` between two lens frames, via explicit links or a shared
    /// sensor TCP.
    pub fn device_transform(&self, from: &str, to: &str) -> Result<Pose6D> {
        let mut adj: BTreeMap<&str, Vec<(&str, Pose6D)>> = BTreeMap::new();
        for l in &self.device_links {
            adj.entry(l.from.as_str()).or_default().push((l.to.as_str(), l.pose));
            adj.entry(l.to.as_str()).or_default().push((l.from.as_str(), l.pose.inverse()));
        }
        // devices sharing a TCP without an explicit link
        for s in &self.sensors {
            for a in &s.devices {
                for b in &s.devices {
                    if a.id != b.id {
                        let linked = self.device_links.iter().any(|l| {
                            (l.from == a.id && l.to == b.id) || (l.from == b.id && l.to == a.id)
                        });
                        if !linked {
                            adj.entry(a.id.as_str()).or_default().push((b.id.as_str(), a.mount.inverse().compose(&b.mount)));
                        }
                    }
                }
            }
        }
        let mut seen: BTreeMap<&str, Pose6D> = BTreeMap::new();
        seen.insert(from, Pose6D::identity());
        let mut queue = VecDeque::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                return Ok(seen[n]);
            }
            let base = seen[n];
            for (m, p) in adj.get(n).into_iter().flatten() {
                if !seen.contains_key(m) {
                    seen.insert(m, base.compose(p));
                    queue.push_back(m);
                }
            }
        }
        Err(CspaceError::UnresolvedFrame(format!("no transform chain from {from} to {to}")))
    }
}

/// Device pose in the feature frame for a given robot flange pose
/// (`T_r->flange`): `T_f->o T_o->w T_w->r T_r->flange T_flange->TCP T_TCP->s`.
pub fn sensor_pose_in_feature_frame(
    scene: &Scene,
    robot_flange: &Pose6D,
    sensor: &RangeSensor,
    device: &ImagingDevice,
    feature: &Feature,
) -> Result<Pose6D> {
    if !sensor.devices.iter().any(|d| d.id == device.id) {
        return Err(CspaceError::UnresolvedFrame(format!("device {} not on sensor {}", device.id, sensor.id)));
    }
    let world_feature = feature.world_frame(&scene.object_pose);
    Ok(world_feature
        .inverse()
        .compose(&scene.robot_base)
        .compose(robot_flange)
        .compose(&sensor.flange_mount)
        .compose(&device.mount))
}
