//! Manifold-independent checks of a sensor pose: feature containment in
//! the (error-shrunk) frustum, incidence, line of sight, workspace
//! membership, for every device and feature. Also a ray-cast depth
//! renderer used to confirm visibility.

use crate::cspace::Reference;
use crate::domain::{feature_hull_points, feature_surface_points, Feature, FeatureKind, Frustum, ImagingParams, Scene};
use cspace_geom::polytope::{convex_margin, is_convex};
use cspace_geom::shapes::cuboid;
use cspace_geom::{IndexedMesh, Manifold, Mat3, Pose6D, Ray, Vec3, BOUNDARY_TOL};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Per-device data the checks need.
#[derive(Debug, Clone)]
pub struct DeviceCheck {
    pub id: String,
    /// Device lens pose in the reference device's lens frame.
    pub offset: Pose6D,
    /// Frustum in the lens frame after accuracy and error-budget shrinking.
    pub frustum: Manifold,
    pub max_incidence_deg: f64,
}

/// What to check and against which devices and features.
#[derive(Debug, Clone)]
pub struct CheckSpec {
    /// Frame of the checked positions. Its mount places the lens of the
    /// device the offsets below are relative to.
    pub reference: Reference,
    /// Reference-frame world rotations the pose must satisfy.
    pub rotations: Vec<Mat3>,
    pub devices: Vec<DeviceCheck>,
    pub features: Vec<Feature>,
    /// Require every hull point of each feature (C3); else only the origin.
    pub full_feature: bool,
    pub incidence: bool,
    pub line_of_sight: bool,
    pub workspace: bool,
    /// Mount (TCP -> lens) of the reference device, for workspace checks.
    pub reference_mount: Pose6D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckKind {
    Frustum,
    Incidence,
    LineOfSight,
    Workspace,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub kind: CheckKind,
    pub device: String,
    pub feature: Option<String>,
    pub orientation: usize,
    pub passed: bool,
    /// mm for containment (positive inside), deg of slack for incidence,
    /// mm of clearance to the first occluder hit.
    pub margin: Option<f64>,
    /// Containment flag per checked feature point.
    pub points: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub position: [f64; 3],
    pub entries: Vec<CheckEntry>,
    pub occlusion_hits: Vec<String>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn min_margin(&self, kind: CheckKind) -> Option<f64> {
        self.entries.iter().filter(|e| e.kind == kind).filter_map(|e| e.margin).reduce(f64::min)
    }
}

/// Reusable checker with prebuilt acceleration structures.
pub struct Validator<'a> {
    scene: &'a Scene,
    spec: &'a CheckSpec,
    occluders: Vec<(String, IndexedMesh)>,
    convex: Vec<bool>,
    frusta: Vec<IndexedMesh>,
}

impl<'a> Validator<'a> {
    pub fn new(scene: &'a Scene, spec: &'a CheckSpec) -> Self {
        let occluders = scene.occluders.iter().map(|b| (b.id.clone(), IndexedMesh::new(b.world_mesh()))).collect();
        let convex = spec.devices.iter().map(|d| is_convex(&d.frustum, 1e-7)).collect();
        let frusta = spec.devices.iter().map(|d| IndexedMesh::new(d.frustum.clone())).collect();
        Validator { scene, spec, occluders, convex, frusta }
    }

    fn frustum_margin(&self, i: usize, p: &Vec3) -> f64 {
        if self.convex[i] {
            convex_margin(&self.spec.devices[i].frustum, p)
        } else {
            let d = self.frusta[i].mesh.distance_to_surface(p);
            if self.frusta[i].contains_point_tol(p, 0.0) {
                d
            } else {
                -d
            }
        }
    }

    /// Check a reference-frame position against every orientation.
    pub fn validate(&self, position: &Vec3) -> ValidationReport {
        let spec = self.spec;
        let mut entries = Vec::new();
        let mut hits = Vec::new();
        if !position.iter().all(|c| c.is_finite()) {
            return ValidationReport { position: [position.x, position.y, position.z], entries, occlusion_hits: hits, passed: false };
        }
        for (oi, r) in spec.rotations.iter().enumerate() {
            let ref_pose = Pose6D::from_parts(*position, *r);
            let ref_lens = ref_pose.compose(&spec.reference.mount);
            for (di, dev) in spec.devices.iter().enumerate() {
                let lens = ref_lens.compose(&dev.offset);
                let inv = lens.inverse();
                let axis = lens.rotation.column(2).into_owned();
                for f in &spec.features {
                    let fw = f.world_frame(&self.scene.object_pose);
                    let pts: Vec<Vec3> = if spec.full_feature {
                        feature_hull_points(f).iter().map(|p| fw.transform_point(p)).collect()
                    } else {
                        vec![fw.transform_point(&origin_point(f))]
                    };
                    let margins: Vec<f64> = pts.iter().map(|p| self.frustum_margin(di, &inv.transform_point(p))).collect();
                    let m = margins.iter().copied().fold(f64::INFINITY, f64::min);
                    entries.push(CheckEntry {
                        kind: CheckKind::Frustum,
                        device: dev.id.clone(),
                        feature: Some(f.id.clone()),
                        orientation: oi,
                        passed: m >= -BOUNDARY_TOL,
                        margin: Some(m),
                        points: margins.iter().map(|&x| x >= -BOUNDARY_TOL).collect(),
                    });
                    if spec.incidence {
                        let n = fw.rotation.column(2).into_owned();
                        let phi = crate::domain::incidence_angle(&n, &axis);
                        entries.push(CheckEntry {
                            kind: CheckKind::Incidence,
                            device: dev.id.clone(),
                            feature: Some(f.id.clone()),
                            orientation: oi,
                            passed: phi.abs() < dev.max_incidence_deg,
                            margin: Some(dev.max_incidence_deg - phi.abs()),
                            points: Vec::new(),
                        });
                    }
                    if spec.line_of_sight {
                        let mut clearance = f64::INFINITY;
                        let mut flags = Vec::new();
                        for p in feature_surface_points(f) {
                            let target = fw.transform_point(&p);
                            let d = target - lens.translation;
                            let dist = d.norm();
                            let mut free = true;
                            if dist > 0.0 {
                                let ray = Ray::new(lens.translation, d);
                                for (id, body) in &self.occluders {
                                    if let Some(h) = body.closest_hit(&ray, 0.0, dist) {
                                        if h.t < dist - BOUNDARY_TOL {
                                            free = false;
                                            clearance = clearance.min(h.t - dist);
                                            hits.push(format!("{}:{}->{}", dev.id, f.id, id));
                                        }
                                    }
                                }
                            }
                            flags.push(free);
                        }
                        let ok = flags.iter().all(|&b| b);
                        entries.push(CheckEntry {
                            kind: CheckKind::LineOfSight,
                            device: dev.id.clone(),
                            feature: Some(f.id.clone()),
                            orientation: oi,
                            passed: ok,
                            margin: clearance.is_finite().then_some(clearance),
                            points: flags,
                        });
                    }
                }
            }
            if spec.workspace {
                if let Some(w) = &self.scene.workspace {
                    let tcp = ref_lens.compose(&spec.reference_mount.inverse()).translation;
                    let inside = w.contains(&tcp);
                    entries.push(CheckEntry {
                        kind: CheckKind::Workspace,
                        device: spec.reference.device.clone(),
                        feature: None,
                        orientation: oi,
                        passed: inside,
                        margin: None,
                        points: vec![inside],
                    });
                }
            }
        }
        let passed = entries.iter().all(|e| e.passed);
        ValidationReport { position: [position.x, position.y, position.z], entries, occlusion_hits: hits, passed }
    }
}

fn origin_point(f: &Feature) -> Vec3 {
    feature_surface_points(f)[0]
}

/// Validate one reference-frame position.
pub fn validate_viewpoint(scene: &Scene, spec: &CheckSpec, position: &Vec3) -> ValidationReport {
    Validator::new(scene, spec).validate(position)
}

/// Overall pass flag per probe position.
pub fn membership_oracle(scene: &Scene, spec: &CheckSpec, probes: &[Vec3]) -> Vec<bool> {
    let v = Validator::new(scene, spec);
    probes.par_iter().map(|p| v.validate(p).passed).collect()
}

/// Uniform samples inside a closed mesh by rejection from its bounding box.
pub fn sample_interior(m: &Manifold, n: usize, seed: u64) -> Vec<Vec3> {
    let Some((lo, hi)) = m.bbox() else { return Vec::new() };
    let idx = IndexedMesh::new(m.clone());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n && tries < n * 10_000 {
        tries += 1;
        let p = Vec3::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y), rng.gen_range(lo.z..=hi.z));
        if idx.contains_point_tol(&p, 0.0) {
            out.push(p);
        }
    }
    out
}

/// Hit-or-miss volume estimate from `n` uniform bounding-box samples.
pub fn mc_volume(m: &Manifold, n: usize, seed: u64) -> f64 {
    let Some((lo, hi)) = m.bbox() else { return 0.0 };
    if n == 0 {
        return 0.0;
    }
    let idx = IndexedMesh::new(m.clone());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec3> = (0..n)
        .map(|_| Vec3::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y), rng.gen_range(lo.z..=hi.z)))
        .collect();
    let inside = pts.par_iter().filter(|p| idx.contains_point_tol(p, 0.0)).count();
    inside as f64 / n as f64 * (hi - lo).product()
}

/// One representative vertex per diagonal direction: the vertex maximising
/// `(±x, ±y, ±z) · v`. Distinct when the mesh has at least 8 vertices.
pub fn extreme_vertices(m: &Manifold) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::new();
    let c = m.vertex_centroid();
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                let d = Vec3::new(sx, sy, sz);
                let mut order: Vec<&Vec3> = m.vertices.iter().collect();
                order.sort_by(|a, b| d.dot(&(*b - c)).total_cmp(&d.dot(&(*a - c))));
                if let Some(v) = order.iter().find(|v| !out.iter().any(|o| (o - **v).norm() < 1e-9)) {
                    out.push(**v);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    /// Row-major z depth in mm, 0 = no hit.
    pub depth: Vec<f64>,
    pub device: String,
    pub pose: Pose6D,
    pub tan_x: f64,
    pub tan_y: f64,
}

impl DepthImage {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.depth[j * self.width + i]
    }

    pub fn nonzero(&self) -> usize {
        self.depth.iter().filter(|&&d| d > 0.0).count()
    }

    /// Continuous pixel coordinates and depth of a world point.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64, f64)> {
        let q = self.pose.inverse().transform_point(p);
        if q.z <= 0.0 {
            return None;
        }
        let u = (q.x / q.z / self.tan_x + 1.0) / 2.0 * self.width as f64;
        let v = (q.y / q.z / self.tan_y + 1.0) / 2.0 * self.height as f64;
        Some((u, v, q.z))
    }

    /// True if some pixel next to the projection sees the point itself.
    pub fn sees(&self, p: &Vec3, depth_tol: f64) -> bool {
        let Some((u, v, z)) = self.project(p) else { return false };
        let (w, h) = (self.width as f64, self.height as f64);
        if u < -1.0 || v < -1.0 || u > w + 1.0 || v > h + 1.0 {
            return false;
        }
        let ci = (u.floor() as i64).clamp(0, self.width as i64 - 1);
        let cj = (v.floor() as i64).clamp(0, self.height as i64 - 1);
        for j in cj - 1..=cj + 1 {
            for i in ci - 1..=ci + 1 {
                if i < 0 || j < 0 || i >= self.width as i64 || j >= self.height as i64 {
                    continue;
                }
                let d = self.at(i as usize, j as usize);
                if d > 0.0 && (d - z).abs() <= depth_tol {
                    return true;
                }
            }
        }
        false
    }

    /// Back-projected points of all hit pixels, world frame.
    pub fn points(&self) -> Vec<Vec3> {
        let mut out = Vec::new();
        for j in 0..self.height {
            for i in 0..self.width {
                let d = self.at(i, j);
                if d > 0.0 {
                    let (x, y) = self.pixel_tangents(i, j);
                    out.push(self.pose.transform_point(&Vec3::new(x * d, y * d, d)));
                }
            }
        }
        out
    }

    fn pixel_tangents(&self, i: usize, j: usize) -> (f64, f64) {
        let x = ((i as f64 + 0.5) / self.width as f64 * 2.0 - 1.0) * self.tan_x;
        let y = ((j as f64 + 0.5) / self.height as f64 * 2.0 - 1.0) * self.tan_y;
        (x, y)
    }

    /// Binary 16-bit PGM, depth in units of 0.1 mm.
    pub fn write_pgm(&self, path: &Path) -> std::io::Result<()> {
        let mut buf = format!("P5\n{} {}\n65535\n", self.width, self.height).into_bytes();
        for d in &self.depth {
            let v = (d * 10.0).round().clamp(0.0, 65535.0) as u16;
            buf.extend_from_slice(&v.to_be_bytes());
        }
        std::fs::write(path, buf)
    }
}

pub fn write_xyz(path: &Path, pts: &[Vec3]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for p in pts {
        writeln!(f, "{} {} {}", p.x, p.y, p.z)?;
    }
    f.flush()
}

/// Everything a depth renderer sees: object, feature patches, occluders.
pub fn scene_render_mesh(scene: &Scene) -> Manifold {
    let mut m = Manifold::empty();
    if let Some(o) = &scene.object_mesh {
        m = m.merged(&o.transformed(&scene.object_pose));
    }
    for f in &scene.features {
        let fw = f.world_frame(&scene.object_pose);
        let half = f.side_length_mm / 2.0 + 2.0;
        let patch = match f.kind {
            FeatureKind::Convex => cuboid(&Vec3::new(-half, -half, 0.0), &Vec3::new(half, half, f.height_mm)),
            _ => cuboid(&Vec3::new(-half, -half, -1.0), &Vec3::new(half, half, 0.0)),
        };
        m = m.merged(&patch.transformed(&fw));
    }
    for b in &scene.occluders {
        m = m.merged(&b.world_mesh());
    }
    m
}

/// Pinhole renderer over a prebuilt scene mesh.
pub struct Renderer {
    mesh: IndexedMesh,
}

impl Renderer {
    pub fn new(scene: &Scene) -> Self {
        Renderer { mesh: IndexedMesh::new(scene_render_mesh(scene)) }
    }

    pub fn render(&self, device_id: &str, params: &ImagingParams, lens_pose: &Pose6D, resolution: (usize, usize)) -> DepthImage {
        let frustum: Frustum = params.frustum().expect("validated params");
        let (tan_x, tan_y) = frustum.max_tangents();
        let (w, h) = (resolution.0.max(16), resolution.1.max(16));
        let (zn, zf) = (frustum.near_depth(), frustum.far_depth());
        let tol = 1.0;
        let mut img = DepthImage { width: w, height: h, depth: vec![0.0; w * h], device: device_id.to_string(), pose: *lens_pose, tan_x, tan_y };
        let rows: Vec<Vec<f64>> = (0..h)
            .into_par_iter()
            .map(|j| {
                (0..w)
                    .map(|i| {
                        let (x, y) = img.pixel_tangents(i, j);
                        let local = Vec3::new(x, y, 1.0);
                        let ray = Ray::new(lens_pose.translation, lens_pose.rotation * local);
                        match self.mesh.closest_hit(&ray, 1e-9, f64::INFINITY) {
                            Some(hit) => {
                                let z = hit.t / local.norm();
                                if z >= zn - tol && z <= zf + tol {
                                    z
                                } else {
                                    0.0
                                }
                            }
                            None => 0.0,
                        }
                    })
                    .collect()
            })
            .collect();
        img.depth = rows.concat();
        img
    }
}

pub fn render_depth(scene: &Scene, device_id: &str, lens_pose: &Pose6D, resolution: (usize, usize)) -> crate::error::Result<DepthImage> {
    let (_, dev) = scene.device(device_id)?;
    Ok(Renderer::new(scene).render(device_id, &dev.params, lens_pose, resolution))
}
