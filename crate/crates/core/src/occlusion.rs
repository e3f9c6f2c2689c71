//! Occlusion spaces: sensor positions from which an occluder blocks the
//! line of sight to a feature surface point, over-approximated by convex
//! hulls of ray-cast collision points and their extensions.

use crate::cspace::{ConstrainedSpace, ConstraintTag, ReferenceFrame};
use crate::domain::{feature_surface_points, Feature, RigidBody};
use crate::error::{CspaceError, Result};
use cspace_geom::boolean::{difference, union_all};
use cspace_geom::{convex_hull, IndexedMesh, Manifold, Mat3, Pose6D, Ray, Vec3};
use rayon::prelude::*;
use std::collections::BTreeSet;

pub const DEFAULT_HULL_SCALE: f64 = 1.02;
const BEYOND_MARGIN: f64 = 1.1;

/// Equidistant angular ray grid per feature surface point.
#[derive(Debug, Clone)]
pub struct ViewRayGrid {
    /// Surface points in world coordinates.
    pub origins: Vec<Vec3>,
    /// Full apertures `(sigma_max_x, sigma_max_y)` per point, degrees.
    pub apertures: Vec<(f64, f64)>,
    pub step_deg: f64,
    pub rotation: Mat3,
    pub rays: Vec<Vec<Ray>>,
}

impl ViewRayGrid {
    pub fn ray_count(&self) -> usize {
        self.rays.iter().map(Vec::len).sum()
    }
}

/// Rays per axis for a full aperture: at least `(sigma_max + 1) / step`
/// and enough that the centred grid spans the aperture.
pub fn rays_per_axis(sigma_max_deg: f64, step_deg: f64) -> usize {
    let a = ((sigma_max_deg + 1.0) / step_deg - 1e-9).ceil();
    let b = (sigma_max_deg / step_deg - 1e-9).ceil() + 1.0;
    a.max(b).max(1.0) as usize
}

/// Offsets `(m - (n-1)/2) * step`, m = 0..n.
pub fn grid_angles(n: usize, step_deg: f64) -> Vec<f64> {
    (0..n).map(|m| (m as f64 - (n as f64 - 1.0) / 2.0) * step_deg).collect()
}

/// View rays from each surface point of `f` covering the parent space.
pub fn view_rays(f: &Feature, feature_world: &Pose6D, parent: &ConstrainedSpace, step_deg: f64) -> Result<ViewRayGrid> {
    if parent.is_empty() {
        return Err(CspaceError::Incompatible("view rays need a non-empty parent space".into()));
    }
    if !(step_deg > 0.0) {
        return Err(CspaceError::Config("ray step must be positive".into()));
    }
    if parent.reference.frame != ReferenceFrame::Lens {
        return Err(CspaceError::Incompatible("occlusion is defined for lens-referenced spaces".into()));
    }
    let r = parent.rotation().ok_or_else(|| CspaceError::Incompatible("occlusion needs a fixed orientation".into()))?;
    let rt = r.transpose();
    let mut grid = ViewRayGrid { origins: Vec::new(), apertures: Vec::new(), step_deg, rotation: r, rays: Vec::new() };
    for p in feature_surface_points(f) {
        let g = feature_world.transform_point(&p);
        let (mut mx, mut my) = (0.0f64, 0.0f64);
        for v in &parent.manifold.vertices {
            let d = rt * (v - g);
            mx = mx.max(d.x.atan2(-d.z).to_degrees().abs());
            my = my.max(d.y.atan2(-d.z).to_degrees().abs());
        }
        let (sx, sy) = (2.0 * mx, 2.0 * my);
        let ax = grid_angles(rays_per_axis(sx, step_deg), step_deg);
        let ay = grid_angles(rays_per_axis(sy, step_deg), step_deg);
        let mut rays = Vec::with_capacity(ax.len() * ay.len());
        for &a in &ay {
            for &b in &ax {
                let local = Vec3::new(b.to_radians().tan(), a.to_radians().tan(), -1.0);
                rays.push(Ray::new(g, r * local));
            }
        }
        grid.origins.push(g);
        grid.apertures.push((sx, sy));
        grid.rays.push(rays);
    }
    Ok(grid)
}

#[derive(Debug, Clone, Default)]
pub struct OcclusionSpace {
    pub manifold: Manifold,
    pub bodies: Vec<String>,
    pub collision_points: Vec<Vec3>,
    pub beyond_points: Vec<Vec3>,
}

impl OcclusionSpace {
    pub fn is_empty(&self) -> bool {
        self.manifold.is_empty()
    }

    pub fn translated(&self, t: &Vec3) -> OcclusionSpace {
        OcclusionSpace {
            manifold: self.manifold.translated(t),
            bodies: self.bodies.clone(),
            collision_points: self.collision_points.iter().map(|p| p + t).collect(),
            beyond_points: self.beyond_points.iter().map(|p| p + t).collect(),
        }
    }
}

/// Occlusion space of `bodies` for feature `f`, relative to `parent`.
pub fn occlusion_space(
    f: &Feature,
    feature_world: &Pose6D,
    parent: &ConstrainedSpace,
    bodies: &[RigidBody],
    step_deg: f64,
    hull_scale: f64,
) -> Result<OcclusionSpace> {
    if bodies.is_empty() || parent.is_empty() {
        return Ok(OcclusionSpace::default());
    }
    let grid = view_rays(f, feature_world, parent, step_deg)?;
    let center = parent.manifold.vertex_centroid();
    let radius = parent.manifold.bounding_radius(&center);
    let mut hulls = Vec::new();
    let mut out = OcclusionSpace::default();
    for body in bodies {
        let mesh = IndexedMesh::new(body.world_mesh());
        let mut tris: BTreeSet<usize> = BTreeSet::new();
        let mut q: Vec<Vec3> = Vec::new();
        for (g, rays) in grid.origins.iter().zip(&grid.rays) {
            let reach = (center - g).norm() + radius;
            let hits: Vec<_> = rays.par_iter().filter_map(|ray| mesh.closest_hit(ray, 1e-9, reach)).collect();
            for h in hits {
                q.push(h.point);
                tris.insert(h.triangle);
            }
        }
        if q.is_empty() {
            continue;
        }
        // corners of every hit triangle close gaps between grid rays
        for &t in &tris {
            q.extend(mesh.mesh.triangle(t));
        }
        dedup_points(&mut q);
        let mut beyond = Vec::with_capacity(q.len() * grid.origins.len());
        for g in &grid.origins {
            let s = ((center - g).norm() + radius) * BEYOND_MARGIN;
            for p in &q {
                let d = p - g;
                if d.norm() > 1e-9 {
                    beyond.push(g + d.normalize() * s);
                }
            }
        }
        let mut pts = q.clone();
        pts.extend_from_slice(&beyond);
        let hull = convex_hull(&pts)?;
        let c = hull.centroid();
        hulls.push(hull.scaled_about(hull_scale, &c));
        out.bodies.push(body.id.clone());
        out.collision_points.extend(q);
        out.beyond_points.extend(beyond);
    }
    out.manifold = union_all(hulls)?;
    Ok(out)
}

fn dedup_points(v: &mut Vec<Vec3>) {
    v.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z)));
    v.dedup_by(|a, b| (*a - *b).norm() < 1e-9);
}

/// C6: remove the occlusion space.
pub fn subtract_occlusion(space: &ConstrainedSpace, occl: &OcclusionSpace) -> Result<ConstrainedSpace> {
    let mut out = if occl.is_empty() {
        space.clone()
    } else {
        let m = difference(&space.manifold, &occl.manifold)?;
        let mut o = space.clone().with_manifold(m);
        o.post_occlusion = true;
        o
    };
    out.push_tag(ConstraintTag::C6, format!("occluders [{}]", occl.bodies.join(",")));
    Ok(out)
}
