//! Turn a polygon soup from clipping or BSP CSG into an indexed mesh:
//! weld close vertices, repair T-junctions, triangulate.

use crate::{Manifold, Vec3};
use std::collections::HashMap;

pub(crate) const WELD_TOL: f64 = 1e-6;
const TJ_TOL: f64 = 1e-6;

struct Welder {
    cell: f64,
    grid: HashMap<(i64, i64, i64), Vec<usize>>,
    points: Vec<Vec3>,
}

impl Welder {
    fn new() -> Self {
        Welder { cell: WELD_TOL * 4.0, grid: HashMap::new(), points: Vec::new() }
    }

    fn key(&self, p: &Vec3) -> (i64, i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64, (p.z / self.cell).floor() as i64)
    }

    fn insert(&mut self, p: &Vec3) -> usize {
        let (kx, ky, kz) = self.key(p);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &i in ids {
                            let d = (self.points[i] - p).norm();
                            if d <= WELD_TOL && best.map_or(true, |(bd, _)| d < bd) {
                                best = Some((d, i));
                            }
                        }
                    }
                }
            }
        }
        if let Some((_, i)) = best {
            return i;
        }
        let i = self.points.len();
        self.points.push(*p);
        self.grid.entry((kx, ky, kz)).or_default().push(i);
        i
    }
}

pub(crate) fn polygons_to_manifold(polys: &[Vec<Vec3>]) -> Manifold {
    let mut w = Welder::new();
    let mut ipolys: Vec<Vec<usize>> = Vec::with_capacity(polys.len());
    for p in polys {
        let mut ids: Vec<usize> = Vec::with_capacity(p.len());
        for v in p {
            let i = w.insert(v);
            if ids.last() != Some(&i) {
                ids.push(i);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        if ids.len() >= 3 {
            ipolys.push(ids);
        }
    }
    let mut points = w.points;
    split_t_junctions(&points, &mut ipolys);

    let mut faces = Vec::new();
    for poly in &ipolys {
        triangulate(&mut points, poly, &mut faces);
    }
    Manifold::new(points, faces).compacted()
}

fn split_t_junctions(points: &[Vec3], polys: &mut [Vec<usize>]) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    let xs: Vec<f64> = order.iter().map(|&i| points[i].x).collect();
    let mut cache: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for poly in polys.iter_mut() {
        let n = poly.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            out.push(a);
            let key = (a.min(b), a.max(b));
            let inner = cache.entry(key).or_insert_with(|| edge_interior_points(points, &order, &xs, key.0, key.1));
            if a < b {
                out.extend(inner.iter());
            } else {
                out.extend(inner.iter().rev());
            }
        }
        *poly = out;
    }
}

/// Vertices strictly inside segment `ab`, sorted from `a` to `b`.
fn edge_interior_points(points: &[Vec3], order: &[usize], xs: &[f64], a: usize, b: usize) -> Vec<usize> {
    let (pa, pb) = (points[a], points[b]);
    let d = pb - pa;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return Vec::new();
    }
    let lo = pa.inf(&pb) - Vec3::repeat(TJ_TOL);
    let hi = pa.sup(&pb) + Vec3::repeat(TJ_TOL);
    let start = xs.partition_point(|&x| x < lo.x);
    let mut found: Vec<(f64, usize)> = Vec::new();
    for (&i, &x) in order[start..].iter().zip(&xs[start..]) {
        if x > hi.x {
            break;
        }
        if i == a || i == b {
            continue;
        }
        let p = points[i];
        if p.y < lo.y || p.y > hi.y || p.z < lo.z || p.z > hi.z {
            continue;
        }
        let t = (p - pa).dot(&d) / len2;
        if t <= 0.0 || t >= 1.0 {
            continue;
        }
        let off = (pa + d * t - p).norm();
        let along = t * len2.sqrt();
        let back = (1.0 - t) * len2.sqrt();
        if off <= TJ_TOL && along > TJ_TOL && back > TJ_TOL {
            found.push((t, i));
        }
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    found.into_iter().map(|(_, i)| i).collect()
}

fn triangulate(points: &mut Vec<Vec3>, poly: &[usize], faces: &mut Vec<[usize; 3]>) {
    let n = poly.len();
    if n == 3 {
        faces.push([poly[0], poly[1], poly[2]]);
        return;
    }
    let flat_corner = (0..n).any(|k| {
        let p = points[poly[(k + n - 1) % n]];
        let q = points[poly[k]];
        let r = points[poly[(k + 1) % n]];
        let (u, v) = (q - p, r - q);
        u.cross(&v).norm() <= 1e-12 * u.norm() * v.norm()
    });
    if !flat_corner {
        for k in 1..n - 1 {
            faces.push([poly[0], poly[k], poly[k + 1]]);
        }
        return;
    }
    // a fan from an interior point never yields zero-area triangles on a
    // convex polygon with collinear boundary vertices
    let c = poly.iter().map(|&i| points[i]).sum::<Vec3>() / n as f64;
    let ci = points.len();
    points.push(c);
    for k in 0..n {
        faces.push([ci, poly[k], poly[(k + 1) % n]]);
    }
}
