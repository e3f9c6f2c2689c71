//! Convex polytopes as face polygons plus supporting halfspaces. Used as the
//! exact fast path for intersections of convex C-spaces.

use crate::{assemble, shapes, Manifold, Vec3, EMPTY_VOLUME};

const CLIP_EPS: f64 = 1e-9;

/// Halfspace `normal . x <= offset`, `normal` unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Vec3, offset: f64) -> Self {
        Plane { normal, offset }
    }

    pub fn from_points(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<Plane> {
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        let scale = (b - a).norm().max((c - a).norm());
        if !(len > 1e-14 * scale * scale) || len == 0.0 {
            return None;
        }
        let n = n / len;
        // offset from the mean keeps all three corners equally close
        Some(Plane { normal: n, offset: n.dot(&((a + b + c) / 3.0)) })
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn flipped(&self) -> Plane {
        Plane { normal: -self.normal, offset: -self.offset }
    }

    fn same_as(&self, o: &Plane) -> bool {
        self.normal.dot(&o.normal) > 1.0 - 1e-12 && (self.offset - o.offset).abs() < 1e-9
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConvexPolytope {
    pub faces: Vec<Vec<Vec3>>,
    pub planes: Vec<Plane>,
}

impl ConvexPolytope {
    /// Interpret a convex mesh as a polytope. Coplanar triangles are merged
    /// into one polygon per plane, so repeated clipping does not multiply
    /// faces.
    pub fn from_manifold(m: &Manifold) -> ConvexPolytope {
        let mut planes: Vec<Plane> = Vec::new();
        let mut members: Vec<Vec<Vec3>> = Vec::new();
        for [a, b, c] in m.triangles() {
            let Some(p) = Plane::from_points(&a, &b, &c) else { continue };
            match planes.iter().position(|q| q.normal.dot(&p.normal) > 1.0 - 1e-10 && (q.offset - p.offset).abs() < 1e-7) {
                Some(i) => members[i].extend([a, b, c]),
                None => {
                    planes.push(p);
                    members.push(vec![a, b, c]);
                }
            }
        }
        let mut out = ConvexPolytope::default();
        for (p, pts) in planes.into_iter().zip(members) {
            if let Some(poly) = face_hull(&pts, &p.normal) {
                out.faces.push(poly);
                out.planes.push(p);
            }
        }
        out
    }

    /// Intersection of halfspaces inside the box `[lo, hi]`.
    pub fn from_halfspaces(planes: &[Plane], lo: &Vec3, hi: &Vec3) -> ConvexPolytope {
        let mut p = ConvexPolytope::from_manifold(&shapes::cuboid(lo, hi));
        for pl in planes {
            p = p.clip(pl);
        }
        p
    }

    pub fn is_empty(&self) -> bool {
        self.faces.len() < 4
    }

    /// Keep the part with `plane.signed_distance <= 0`.
    pub fn clip(&self, plane: &Plane) -> ConvexPolytope {
        if self.is_empty() {
            return ConvexPolytope::default();
        }
        let mut out = ConvexPolytope::default();
        let mut cap: Vec<Vec3> = Vec::new();
        let mut changed = false;
        let mut coplanar_kept = false;
        for (face, fp) in self.faces.iter().zip(&self.planes) {
            let d: Vec<f64> = face.iter().map(|v| plane.signed_distance(v)).collect();
            let any_out = d.iter().any(|&x| x > CLIP_EPS);
            let any_in = d.iter().any(|&x| x < -CLIP_EPS);
            for (v, &x) in face.iter().zip(&d) {
                if x.abs() <= CLIP_EPS {
                    cap.push(*v);
                }
            }
            if !any_out {
                if !any_in && fp.same_as(plane) {
                    coplanar_kept = true;
                }
                out.faces.push(face.clone());
                out.planes.push(*fp);
                continue;
            }
            changed = true;
            if !any_in {
                continue;
            }
            let n = face.len();
            let mut poly = Vec::with_capacity(n + 1);
            for i in 0..n {
                let j = (i + 1) % n;
                let (vi, vj) = (&face[i], &face[j]);
                let (di, dj) = (d[i], d[j]);
                if di <= CLIP_EPS {
                    poly.push(*vi);
                }
                if (di < -CLIP_EPS && dj > CLIP_EPS) || (di > CLIP_EPS && dj < -CLIP_EPS) {
                    let x = edge_point(vi, di, vj, dj);
                    poly.push(x);
                    cap.push(x);
                }
            }
            if poly.len() >= 3 {
                out.faces.push(poly);
                out.planes.push(*fp);
            }
        }
        if !changed {
            return self.clone();
        }
        if !coplanar_kept {
            if let Some(poly) = order_cap(&cap, &plane.normal) {
                out.faces.push(poly);
                out.planes.push(*plane);
            }
        }
        if out.faces.len() < 4 {
            return ConvexPolytope::default();
        }
        out
    }

    pub fn volume(&self) -> f64 {
        let Some(o) = self.faces.first().and_then(|f| f.first()).copied() else {
            return 0.0;
        };
        let mut v = 0.0;
        for f in &self.faces {
            for i in 1..f.len().saturating_sub(1) {
                v += (f[0] - o).dot(&(f[i] - o).cross(&(f[i + 1] - o)));
            }
        }
        v / 6.0
    }

    pub fn to_manifold(&self) -> Manifold {
        if self.is_empty() || self.volume() < EMPTY_VOLUME {
            return Manifold::empty();
        }
        assemble::polygons_to_manifold(&self.faces)
    }
}

/// Interpolate with a canonical endpoint order so both faces sharing an
/// edge produce bit-identical points.
fn edge_point(a: &Vec3, da: f64, b: &Vec3, db: f64) -> Vec3 {
    let swap = (b.x, b.y, b.z) < (a.x, a.y, a.z);
    let (a, da, b, db) = if swap { (b, db, a, da) } else { (a, da, b, db) };
    let t = da / (da - db);
    a + (b - a) * t
}

/// Strict convex hull of coplanar points, counter-clockwise about `normal`.
/// Drops interior points (fan centres) and points on edges.
fn face_hull(points: &[Vec3], normal: &Vec3) -> Option<Vec<Vec3>> {
    let u = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = (u - normal * normal.dot(&u)).normalize();
    let v = normal.cross(&u);
    let mut pts: Vec<(f64, f64, Vec3)> = points.iter().map(|p| (p.dot(&u), p.dot(&v), *p)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.2 - b.2).norm() < 1e-9);
    if pts.len() < 3 {
        return None;
    }
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.0.abs()).max(p.1.abs())).max(1.0);
    let tol = 1e-12 * scale * scale;
    let cross = |o: &(f64, f64, Vec3), a: &(f64, f64, Vec3), b: &(f64, f64, Vec3)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64, Vec3)> = Vec::with_capacity(pts.len() + 1);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64, Vec3)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return None;
    }
    Some(hull.into_iter().map(|p| p.2).collect())
}

fn order_cap(points: &[Vec3], normal: &Vec3) -> Option<Vec<Vec3>> {
    let mut uniq: Vec<Vec3> = Vec::new();
    for p in points {
        if !uniq.iter().any(|q| (q - p).norm() < 1e-9) {
            uniq.push(*p);
        }
    }
    if uniq.len() < 3 {
        return None;
    }
    let c = uniq.iter().sum::<Vec3>() / uniq.len() as f64;
    let u = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = (u - normal * normal.dot(&u)).normalize();
    let v = normal.cross(&u);
    let mut keyed: Vec<(f64, Vec3)> =
        uniq.into_iter().map(|p| ((p - c).dot(&v).atan2((p - c).dot(&u)), p)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let poly: Vec<Vec3> = keyed.into_iter().map(|(_, p)| p).collect();
    let mut area = Vec3::zeros();
    for i in 1..poly.len() - 1 {
        area += (poly[i] - poly[0]).cross(&(poly[i + 1] - poly[0]));
    }
    if area.norm() < 1e-12 {
        return None;
    }
    Some(poly)
}

/// True if every vertex lies behind every face plane (within `tol`).
pub fn is_convex(m: &Manifold, tol: f64) -> bool {
    if m.is_empty() || !m.is_watertight() {
        return false;
    }
    for [a, b, c] in m.triangles() {
        let Some(p) = Plane::from_points(&a, &b, &c) else { continue };
        if m.vertices.iter().any(|v| p.signed_distance(v) > tol) {
            return false;
        }
    }
    true
}

/// Halfspace membership test for a convex mesh; boundary counts as inside.
pub fn contains_point_convex(m: &Manifold, p: &Vec3, tol: f64) -> bool {
    if m.is_empty() {
        return false;
    }
    m.triangles().all(|[a, b, c]| match Plane::from_points(&a, &b, &c) {
        Some(pl) => pl.signed_distance(p) <= tol,
        None => true,
    })
}

/// Signed distance to the boundary of a convex mesh, positive inside.
pub fn convex_margin(m: &Manifold, p: &Vec3) -> f64 {
    m.triangles()
        .filter_map(|[a, b, c]| Plane::from_points(&a, &b, &c))
        .map(|pl| -pl.signed_distance(p))
        .fold(f64::INFINITY, f64::min)
}

/// Exact intersection of two convex meshes by halfspace clipping.
pub fn intersect_convex(a: &Manifold, b: &Manifold) -> Manifold {
    if a.is_empty() || b.is_empty() {
        return Manifold::empty();
    }
    let mut p = ConvexPolytope::from_manifold(a);
    let mut seen: Vec<Plane> = Vec::new();
    for [x, y, z] in b.triangles() {
        let Some(pl) = Plane::from_points(&x, &y, &z) else { continue };
        if seen.iter().any(|s| s.same_as(&pl)) {
            continue;
        }
        seen.push(pl);
        p = p.clip(&pl);
        if p.is_empty() {
            return Manifold::empty();
        }
    }
    p.to_manifold()
}
