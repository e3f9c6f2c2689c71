//! Ray casting against triangle meshes with a median-split BVH, and
//! point containment by ray parity.

use crate::mesh::point_triangle_distance;
use crate::{Manifold, Vec3, BOUNDARY_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit direction.
    pub dir: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3) -> Ray {
        Ray { origin, dir: dir.normalize() }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub point: Vec3,
    pub triangle: usize,
}

/// Möller-Trumbore. Returns `(t, u, v)` for hits with `t > t_min`.
pub fn ray_triangle(ray: &Ray, a: &Vec3, b: &Vec3, c: &Vec3, t_min: f64) -> Option<(f64, f64, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let p = ray.dir.cross(&e2);
    let det = e1.dot(&p);
    let scale = e1.norm() * e2.norm();
    if det.abs() <= 1e-14 * scale {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - a;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = ray.dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > t_min).then_some((t, u, v))
}

#[derive(Debug, Clone)]
struct BvhNode {
    lo: Vec3,
    hi: Vec3,
    // leaf: first..first+count into `order`; inner: children at `first`, `first+1`
    first: usize,
    count: usize,
}

/// Bounding-volume hierarchy over a mesh's triangles.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<usize>,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    pub fn build(m: &Manifold) -> Bvh {
        let n = m.faces.len();
        let tri_box: Vec<(Vec3, Vec3)> = m
            .triangles()
            .map(|[a, b, c]| (a.inf(&b).inf(&c), a.sup(&b).sup(&c)))
            .collect();
        let centers: Vec<Vec3> = tri_box.iter().map(|(l, h)| (l + h) / 2.0).collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = vec![BvhNode { lo: Vec3::zeros(), hi: Vec3::zeros(), first: 0, count: n }];
        if n == 0 {
            return Bvh { nodes, order };
        }
        // (node, start, end) ranges into `order`
        let mut stack = vec![(0usize, 0usize, n)];
        while let Some((ni, s, e)) = stack.pop() {
            let mut lo = Vec3::repeat(f64::INFINITY);
            let mut hi = Vec3::repeat(f64::NEG_INFINITY);
            let mut clo = lo;
            let mut chi = hi;
            for &t in &order[s..e] {
                lo = lo.inf(&tri_box[t].0);
                hi = hi.sup(&tri_box[t].1);
                clo = clo.inf(&centers[t]);
                chi = chi.sup(&centers[t]);
            }
            nodes[ni].lo = lo;
            nodes[ni].hi = hi;
            if e - s <= LEAF_SIZE {
                nodes[ni].first = s;
                nodes[ni].count = e - s;
                continue;
            }
            let ext = chi - clo;
            let axis = if ext.x >= ext.y && ext.x >= ext.z { 0 } else if ext.y >= ext.z { 1 } else { 2 };
            let mid = (s + e) / 2;
            order[s..e].select_nth_unstable_by(mid - s, |&a, &b| centers[a][axis].total_cmp(&centers[b][axis]));
            let left = nodes.len();
            nodes.push(BvhNode { lo: Vec3::zeros(), hi: Vec3::zeros(), first: 0, count: 0 });
            nodes.push(BvhNode { lo: Vec3::zeros(), hi: Vec3::zeros(), first: 0, count: 0 });
            nodes[ni].first = left;
            nodes[ni].count = 0;
            stack.push((left, s, mid));
            stack.push((left + 1, mid, e));
        }
        Bvh { nodes, order }
    }

    fn slab(node: &BvhNode, ray: &Ray, inv: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0: f64 = 0.0;
        let mut t1 = t_max;
        for k in 0..3 {
            let mut a = (node.lo[k] - ray.origin[k]) * inv[k];
            let mut b = (node.hi[k] - ray.origin[k]) * inv[k];
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            // NaN from 0*inf means the origin sits on the slab plane: keep it
            if a.is_nan() || b.is_nan() {
                continue;
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 * (1.0 + 1e-12) + 1e-12 {
                return None;
            }
        }
        Some(t0)
    }

    /// Nearest hit with `t_min < t <= t_max`.
    pub fn closest_hit(&self, m: &Manifold, ray: &Ray, t_min: f64, t_max: f64) -> Option<Hit> {
        if self.order.is_empty() {
            return None;
        }
        let inv = ray.dir.map(|d| 1.0 / d);
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if Self::slab(node, ray, &inv, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.first..node.first + node.count] {
                    let [a, b, c] = m.triangle(ti);
                    if let Some((t, _, _)) = ray_triangle(ray, &a, &b, &c, t_min) {
                        if t <= limit {
                            limit = t;
                            best = Some(Hit { t, point: ray.at(t), triangle: ti });
                        }
                    }
                }
            } else {
                stack.push(node.first);
                stack.push(node.first + 1);
            }
        }
        best
    }

    /// Every triangle crossed by the ray beyond `t_min`, as `(t, u, v, tri)`.
    fn all_hits(&self, m: &Manifold, ray: &Ray, t_min: f64) -> Vec<(f64, f64, f64, usize)> {
        let mut out = Vec::new();
        if self.order.is_empty() {
            return out;
        }
        let inv = ray.dir.map(|d| 1.0 / d);
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if Self::slab(node, ray, &inv, f64::INFINITY).is_none() {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.first..node.first + node.count] {
                    let [a, b, c] = m.triangle(ti);
                    if let Some((t, u, v)) = ray_triangle(ray, &a, &b, &c, t_min) {
                        out.push((t, u, v, ti));
                    }
                }
            } else {
                stack.push(node.first);
                stack.push(node.first + 1);
            }
        }
        out
    }

    /// Minimum distance from `p` to the mesh, searching only within `radius`.
    fn near_surface(&self, m: &Manifold, p: &Vec3, radius: f64) -> bool {
        if self.order.is_empty() {
            return false;
        }
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let outside = (0..3).any(|k| p[k] < node.lo[k] - radius || p[k] > node.hi[k] + radius);
            if outside {
                continue;
            }
            if node.count > 0 {
                for &ti in &self.order[node.first..node.first + node.count] {
                    let [a, b, c] = m.triangle(ti);
                    if point_triangle_distance(p, &a, &b, &c) <= radius {
                        return true;
                    }
                }
            } else {
                stack.push(node.first);
                stack.push(node.first + 1);
            }
        }
        false
    }
}

/// A mesh with a prebuilt BVH for repeated queries.
#[derive(Debug, Clone)]
pub struct IndexedMesh {
    pub mesh: Manifold,
    bvh: Bvh,
}

/// Irrational-ish directions so parity rays rarely graze edges.
const PROBE_DIRS: [[f64; 3]; 5] = [
    [0.5773502691896258, 0.5773502691896258, 0.5773502691896258],
    [0.2672612419124244, -0.5345224838248488, 0.8017837257372732],
    [-0.7071067811865476, 0.1414213562373095, 0.6928203230275509],
    [0.1240347345892084, 0.9922778767136676, -0.0],
    [-0.3015113445777636, -0.3015113445777636, -0.9045340337332909],
];

impl IndexedMesh {
    pub fn new(mesh: Manifold) -> IndexedMesh {
        let bvh = Bvh::build(&mesh);
        IndexedMesh { mesh, bvh }
    }

    pub fn closest_hit(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<Hit> {
        self.bvh.closest_hit(&self.mesh, ray, t_min, t_max)
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    /// Inside or within `tol` of the surface.
    pub fn contains_point_tol(&self, p: &Vec3, tol: f64) -> bool {
        if self.mesh.is_empty() {
            return false;
        }
        if self.bvh.near_surface(&self.mesh, p, tol) {
            return true;
        }
        let mut votes = 0;
        let mut decided = 0;
        for d in PROBE_DIRS {
            let ray = Ray::new(*p, Vec3::from(d));
            let hits = self.bvh.all_hits(&self.mesh, &ray, 0.0);
            // reject directions that graze an edge or vertex
            let grazing = hits.iter().any(|&(_, u, v, _)| u < 1e-9 || v < 1e-9 || u + v > 1.0 - 1e-9);
            if grazing {
                continue;
            }
            decided += 1;
            if hits.len() % 2 == 1 {
                votes += 1;
            }
            if decided == 3 {
                break;
            }
        }
        if decided == 0 {
            return self.mesh.signed_volume() > 0.0 && winding_number(&self.mesh, p).abs() > 0.5;
        }
        2 * votes > decided
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        self.contains_point_tol(p, BOUNDARY_TOL)
    }
}

/// Generalized winding number; slow but direction independent.
pub fn winding_number(m: &Manifold, p: &Vec3) -> f64 {
    let mut w = 0.0;
    for [a, b, c] in m.triangles() {
        let (a, b, c) = (a - p, b - p, c - p);
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
        w += 2.0 * num.atan2(den);
    }
    w / (4.0 * std::f64::consts::PI)
}

/// Membership test for a closed mesh; points within 1e-6 mm of the surface
/// count as inside.
pub fn contains_point(m: &Manifold, p: &Vec3) -> bool {
    IndexedMesh::new(m.clone()).contains_point(p)
}

/// First hit for each ray, `None` for misses.
pub fn raycast(rays: &[Ray], m: &Manifold) -> Vec<Option<Hit>> {
    let bvh = Bvh::build(m);
    rays.iter().map(|r| bvh.closest_hit(m, r, 1e-9, f64::INFINITY)).collect()
}

/// Brute-force reference for [`raycast`].
pub fn raycast_brute(ray: &Ray, m: &Manifold) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for (i, [a, b, c]) in m.triangles().enumerate() {
        if let Some((t, _, _)) = ray_triangle(ray, &a, &b, &c, 1e-9) {
            if best.map_or(true, |h| t < h.t) {
                best = Some(Hit { t, point: ray.at(t), triangle: i });
            }
        }
    }
    best
}
