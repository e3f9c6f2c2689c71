//! Plane-based BSP trees for Boolean operations on closed polygon meshes.
//!
//! All tree walks use explicit stacks: trees built from convex meshes
//! degenerate into chains as deep as the face count.

use crate::{Manifold, Plane, Vec3};

pub const PLANE_EPS: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct Polygon {
    pub vertices: Vec<Vec3>,
    pub plane: Plane,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec3>) -> Option<Polygon> {
        let plane = polygon_plane(&vertices)?;
        Some(Polygon { vertices, plane })
    }

    fn flip(&mut self) {
        self.vertices.reverse();
        self.plane = self.plane.flipped();
    }
}

/// Newell normal, robust for slightly non-planar or sliver polygons.
fn polygon_plane(v: &[Vec3]) -> Option<Plane> {
    if v.len() < 3 {
        return None;
    }
    let c = v.iter().sum::<Vec3>() / v.len() as f64;
    let mut n = Vec3::zeros();
    for i in 0..v.len() {
        let (a, b) = (v[i] - c, v[(i + 1) % v.len()] - c);
        n += a.cross(&b);
    }
    let len = n.norm();
    if !(len > 1e-18) {
        return None;
    }
    let n = n / len;
    Some(Plane::new(n, n.dot(&c)))
}

pub fn polygons_from_manifold(m: &Manifold) -> Vec<Polygon> {
    m.triangles().filter_map(|t| Polygon::new(t.to_vec())).collect()
}

const COPLANAR: u8 = 0;
const FRONT: u8 = 1;
const BACK: u8 = 2;
const SPANNING: u8 = 3;

fn lerp_canonical(a: &Vec3, da: f64, b: &Vec3, db: f64) -> Vec3 {
    let swap = (b.x, b.y, b.z) < (a.x, a.y, a.z);
    let (a, da, b, db) = if swap { (b, db, a, da) } else { (a, da, b, db) };
    a + (b - a) * (da / (da - db))
}

struct Split {
    coplanar_front: Vec<Polygon>,
    coplanar_back: Vec<Polygon>,
    front: Vec<Polygon>,
    back: Vec<Polygon>,
}

impl Split {
    fn new() -> Self {
        Split { coplanar_front: Vec::new(), coplanar_back: Vec::new(), front: Vec::new(), back: Vec::new() }
    }
}

fn split_polygon(plane: &Plane, poly: Polygon, out: &mut Split) {
    let d: Vec<f64> = poly.vertices.iter().map(|v| plane.signed_distance(v)).collect();
    let types: Vec<u8> = d
        .iter()
        .map(|&t| if t < -PLANE_EPS { BACK } else if t > PLANE_EPS { FRONT } else { COPLANAR })
        .collect();
    let kind = types.iter().fold(0u8, |acc, t| acc | t);
    match kind {
        COPLANAR => {
            if plane.normal.dot(&poly.plane.normal) > 0.0 {
                out.coplanar_front.push(poly)
            } else {
                out.coplanar_back.push(poly)
            }
        }
        FRONT => out.front.push(poly),
        BACK => out.back.push(poly),
        _ => {
            let n = poly.vertices.len();
            let mut f = Vec::with_capacity(n + 1);
            let mut b = Vec::with_capacity(n + 1);
            for i in 0..n {
                let j = (i + 1) % n;
                let (ti, tj) = (types[i], types[j]);
                let vi = poly.vertices[i];
                if ti != BACK {
                    f.push(vi);
                }
                if ti != FRONT {
                    b.push(vi);
                }
                if ti | tj == SPANNING {
                    let v = lerp_canonical(&vi, d[i], &poly.vertices[j], d[j]);
                    f.push(v);
                    b.push(v);
                }
            }
            if f.len() >= 3 {
                out.front.push(Polygon { vertices: f, plane: poly.plane });
            }
            if b.len() >= 3 {
                out.back.push(Polygon { vertices: b, plane: poly.plane });
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Node {
    plane: Option<Plane>,
    front: Option<usize>,
    back: Option<usize>,
    polygons: Vec<Polygon>,
}

#[derive(Debug, Clone)]
pub struct Bsp {
    nodes: Vec<Node>,
}

impl Bsp {
    pub fn new(polygons: Vec<Polygon>) -> Bsp {
        let mut t = Bsp { nodes: vec![Node::default()] };
        t.build(polygons);
        t
    }

    pub fn from_manifold(m: &Manifold) -> Bsp {
        Bsp::new(polygons_from_manifold(m))
    }

    /// Insert polygons into the tree.
    pub fn build(&mut self, polygons: Vec<Polygon>) {
        let mut stack = vec![(0usize, polygons)];
        while let Some((ni, polys)) = stack.pop() {
            if polys.is_empty() {
                continue;
            }
            let mut s = Split::new();
            let mut polys = polys.into_iter();
            let plane = match self.nodes[ni].plane {
                Some(pl) => pl,
                None => {
                    // the seed defines the plane; splitting a slightly
                    // non-planar seed by its own plane never terminates
                    let seed = polys.next().expect("non-empty");
                    let pl = seed.plane;
                    self.nodes[ni].plane = Some(pl);
                    s.coplanar_front.push(seed);
                    pl
                }
            };
            for p in polys {
                split_polygon(&plane, p, &mut s);
            }
            let node = &mut self.nodes[ni];
            node.polygons.append(&mut s.coplanar_front);
            node.polygons.append(&mut s.coplanar_back);
            if !s.front.is_empty() {
                let c = self.child(ni, true);
                stack.push((c, s.front));
            }
            if !s.back.is_empty() {
                let c = self.child(ni, false);
                stack.push((c, s.back));
            }
        }
    }

    fn child(&mut self, ni: usize, front: bool) -> usize {
        let existing = if front { self.nodes[ni].front } else { self.nodes[ni].back };
        if let Some(c) = existing {
            return c;
        }
        let c = self.nodes.len();
        self.nodes.push(Node::default());
        if front {
            self.nodes[ni].front = Some(c);
        } else {
            self.nodes[ni].back = Some(c);
        }
        c
    }

    /// Remove the parts of `polygons` inside this solid.
    pub fn clip_polygons(&self, polygons: Vec<Polygon>) -> Vec<Polygon> {
        let mut result = Vec::new();
        let mut stack = vec![(0usize, polygons)];
        while let Some((ni, polys)) = stack.pop() {
            let node = &self.nodes[ni];
            let Some(plane) = node.plane else {
                result.extend(polys);
                continue;
            };
            let mut s = Split::new();
            for p in polys {
                split_polygon(&plane, p, &mut s);
            }
            let mut front = s.front;
            front.append(&mut s.coplanar_front);
            let mut back = s.back;
            back.append(&mut s.coplanar_back);
            match node.front {
                Some(c) => stack.push((c, front)),
                None => result.extend(front),
            }
            if let Some(c) = node.back {
                stack.push((c, back));
            }
        }
        result
    }

    pub fn clip_to(&mut self, other: &Bsp) {
        for n in &mut self.nodes {
            let polys = std::mem::take(&mut n.polygons);
            n.polygons = other.clip_polygons(polys);
        }
    }

    pub fn invert(&mut self) {
        for n in &mut self.nodes {
            for p in &mut n.polygons {
                p.flip();
            }
            if let Some(pl) = n.plane.as_mut() {
                *pl = pl.flipped();
            }
            std::mem::swap(&mut n.front, &mut n.back);
        }
    }

    pub fn all_polygons(&self) -> Vec<Polygon> {
        self.nodes.iter().flat_map(|n| n.polygons.iter().cloned()).collect()
    }
}

pub fn union(mut a: Bsp, mut b: Bsp) -> Vec<Polygon> {
    a.clip_to(&b);
    b.clip_to(&a);
    b.invert();
    b.clip_to(&a);
    b.invert();
    a.build(b.all_polygons());
    a.all_polygons()
}

pub fn subtract(mut a: Bsp, mut b: Bsp) -> Vec<Polygon> {
    a.invert();
    a.clip_to(&b);
    b.clip_to(&a);
    b.invert();
    b.clip_to(&a);
    b.invert();
    a.build(b.all_polygons());
    a.invert();
    a.all_polygons()
}

pub fn intersect(mut a: Bsp, mut b: Bsp) -> Vec<Polygon> {
    a.invert();
    b.clip_to(&a);
    b.invert();
    a.clip_to(&b);
    b.clip_to(&a);
    a.build(b.all_polygons());
    a.invert();
    a.all_polygons()
}
