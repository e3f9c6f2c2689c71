//! Incremental 3-D convex hull (quickhull point selection).

use crate::{GeomError, Manifold, Result, Vec3};
use std::collections::HashMap;

struct Face {
    v: [usize; 3],
    n: Vec3,
    off: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(pts: &[Vec3], v: [usize; 3]) -> Face {
        let n = (pts[v[1]] - pts[v[0]]).cross(&(pts[v[2]] - pts[v[0]]));
        let n = n / n.norm().max(1e-300);
        Face { v, n, off: n.dot(&pts[v[0]]), outside: Vec::new(), alive: true }
    }

    fn dist(&self, p: &Vec3) -> f64 {
        self.n.dot(p) - self.off
    }
}

pub fn convex_hull(points: &[Vec3]) -> Result<Manifold> {
    if points.len() < 4 {
        return Err(GeomError::DegenerateInput(format!("{} points, need at least 4", points.len())));
    }
    if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(GeomError::DegenerateInput("non-finite point".into()));
    }
    let pts = points;
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let scale = (hi - lo).norm().max(1e-300);
    let eps = 1e-11 * scale;

    let i0 = (0..pts.len()).min_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x)).unwrap();
    let i1 = (0..pts.len()).max_by(|&a, &b| (pts[a] - pts[i0]).norm().total_cmp(&(pts[b] - pts[i0]).norm())).unwrap();
    let dir = (pts[i1] - pts[i0]).normalize();
    let line_dist = |p: &Vec3| {
        let d = p - pts[i0];
        (d - dir * d.dot(&dir)).norm()
    };
    let i2 = (0..pts.len()).max_by(|&a, &b| line_dist(&pts[a]).total_cmp(&line_dist(&pts[b]))).unwrap();
    if line_dist(&pts[i2]) <= 1e-9 * scale {
        return Err(GeomError::DegenerateInput("points are collinear".into()));
    }
    let pn = (pts[i1] - pts[i0]).cross(&(pts[i2] - pts[i0])).normalize();
    let i3 = (0..pts.len())
        .max_by(|&a, &b| pn.dot(&(pts[a] - pts[i0])).abs().total_cmp(&pn.dot(&(pts[b] - pts[i0])).abs()))
        .unwrap();
    if pn.dot(&(pts[i3] - pts[i0])).abs() <= 1e-9 * scale {
        return Err(GeomError::DegenerateInput("points are coplanar".into()));
    }

    let inner = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
    let mut faces: Vec<Face> = Vec::new();
    for tri in [[i0, i1, i2], [i0, i3, i1], [i1, i3, i2], [i2, i3, i0]] {
        let mut f = Face::new(pts, tri);
        if f.dist(&inner) > 0.0 {
            f = Face::new(pts, [tri[0], tri[2], tri[1]]);
        }
        faces.push(f);
    }
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            edges.insert((f.v[k], f.v[(k + 1) % 3]), fi);
        }
    }
    let seeds = [i0, i1, i2, i3];
    for (i, p) in pts.iter().enumerate() {
        if seeds.contains(&i) {
            continue;
        }
        assign(&mut faces, 0..4, i, p, eps);
    }

    loop {
        let Some(fi) = faces.iter().position(|f| f.alive && !f.outside.is_empty()) else { break };
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| faces[fi].dist(&pts[a]).total_cmp(&faces[fi].dist(&pts[b])))
            .unwrap();
        let p = pts[apex];

        // visible region grown from the seed face
        let mut visible = vec![fi];
        let mut is_vis: HashMap<usize, bool> = HashMap::from([(fi, true)]);
        let mut k = 0;
        while k < visible.len() {
            let f = &faces[visible[k]];
            let vs = f.v;
            for e in 0..3 {
                let (a, b) = (vs[e], vs[(e + 1) % 3]);
                if let Some(&nb) = edges.get(&(b, a)) {
                    if !is_vis.contains_key(&nb) {
                        let v = faces[nb].dist(&p) > eps;
                        is_vis.insert(nb, v);
                        if v {
                            visible.push(nb);
                        }
                    }
                }
            }
            k += 1;
        }
        let mut horizon = Vec::new();
        let mut orphans = Vec::new();
        for &vf in &visible {
            let vs = faces[vf].v;
            for e in 0..3 {
                let (a, b) = (vs[e], vs[(e + 1) % 3]);
                let nb = edges[&(b, a)];
                if !is_vis.get(&nb).copied().unwrap_or(false) {
                    horizon.push((a, b));
                }
            }
            orphans.append(&mut faces[vf].outside);
            faces[vf].alive = false;
        }
        for &vf in &visible {
            let vs = faces[vf].v;
            for e in 0..3 {
                edges.remove(&(vs[e], vs[(e + 1) % 3]));
            }
        }
        let first_new = faces.len();
        for (a, b) in horizon {
            let f = Face::new(pts, [a, b, apex]);
            let id = faces.len();
            for k in 0..3 {
                edges.insert((f.v[k], f.v[(k + 1) % 3]), id);
            }
            faces.push(f);
        }
        let end = faces.len();
        for o in orphans {
            if o != apex {
                assign(&mut faces, first_new..end, o, &pts[o], eps);
            }
        }
    }

    let tri: Vec<[usize; 3]> = faces.iter().filter(|f| f.alive).map(|f| f.v).collect();
    Ok(Manifold::new(pts.to_vec(), tri).compacted())
}

fn assign(faces: &mut [Face], range: std::ops::Range<usize>, i: usize, p: &Vec3, eps: f64) {
    let mut best: Option<(f64, usize)> = None;
    for fi in range {
        let d = faces[fi].dist(p);
        if d > eps && best.map_or(true, |(bd, _)| d > bd) {
            best = Some((d, fi));
        }
    }
    if let Some((_, fi)) = best {
        faces[fi].outside.push(i);
    }
}
