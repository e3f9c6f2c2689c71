use crate::{GeomError, Mat3, Pose6D, Result, Vec3};
use std::collections::HashMap;

/// Closed, outward-oriented triangle mesh. The empty mesh stands for the
/// empty set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifold {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl Manifold {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        Manifold { vertices, faces }
    }

    pub fn empty() -> Self {
        Manifold::default()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangles(&self) -> impl Iterator<Item = [Vec3; 3]> + '_ {
        (0..self.faces.len()).map(move |i| self.triangle(i))
    }

    /// Every directed edge is matched by its reverse exactly once.
    pub fn is_watertight(&self) -> bool {
        if self.faces.is_empty() {
            return true;
        }
        let mut count: HashMap<(usize, usize), i32> = HashMap::with_capacity(self.faces.len() * 3);
        for f in &self.faces {
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return false;
            }
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                *count.entry((a, b)).or_insert(0) += 1;
            }
        }
        count.iter().all(|(&(a, b), &n)| count.get(&(b, a)).copied() == Some(n))
    }

    /// Signed volume by the divergence theorem; no watertightness check.
    pub fn signed_volume(&self) -> f64 {
        // shift to a local origin to keep the triple products well conditioned
        let o = self.vertices.first().copied().unwrap_or_else(Vec3::zeros);
        let mut v = 0.0;
        for [a, b, c] in self.triangles() {
            v += (a - o).dot(&(b - o).cross(&(c - o)));
        }
        v / 6.0
    }

    pub fn volume(&self) -> Result<f64> {
        if !self.is_watertight() {
            return Err(GeomError::NotWatertight);
        }
        Ok(self.signed_volume())
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles().map(|[a, b, c]| 0.5 * (b - a).cross(&(c - a)).norm()).sum()
    }

    pub fn bbox(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        let mut lo = first;
        let mut hi = first;
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        Some((lo, hi))
    }

    /// Mean of the vertices (not the volume centroid).
    pub fn vertex_centroid(&self) -> Vec3 {
        if self.vertices.is_empty() {
            return Vec3::zeros();
        }
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    /// Volume centroid, falls back to the vertex mean for flat meshes.
    pub fn centroid(&self) -> Vec3 {
        let o = self.vertex_centroid();
        let mut acc = Vec3::zeros();
        let mut vol = 0.0;
        for [a, b, c] in self.triangles() {
            let v = (a - o).dot(&(b - o).cross(&(c - o))) / 6.0;
            acc += v * ((a - o) + (b - o) + (c - o)) / 4.0;
            vol += v;
        }
        if vol.abs() < 1e-15 {
            o
        } else {
            o + acc / vol
        }
    }

    /// Radius of the smallest origin-centred ball around `center` enclosing the mesh.
    pub fn bounding_radius(&self, center: &Vec3) -> f64 {
        self.vertices.iter().map(|v| (v - center).norm()).fold(0.0, f64::max)
    }

    pub fn transformed(&self, pose: &Pose6D) -> Manifold {
        let vertices = self.vertices.iter().map(|v| pose.transform_point(v)).collect();
        let mut m = Manifold { vertices, faces: self.faces.clone() };
        if pose.rotation.determinant() < 0.0 {
            m.flip();
        }
        m
    }

    pub fn translated(&self, t: &Vec3) -> Manifold {
        Manifold {
            vertices: self.vertices.iter().map(|v| v + t).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Apply a linear map about `center`; winding is fixed for reflections.
    pub fn linear_about(&self, m: &Mat3, center: &Vec3) -> Manifold {
        let vertices = self.vertices.iter().map(|v| center + m * (v - center)).collect();
        let mut out = Manifold { vertices, faces: self.faces.clone() };
        if m.determinant() < 0.0 {
            out.flip();
        }
        out
    }

    pub fn scaled_about(&self, s: f64, center: &Vec3) -> Manifold {
        self.linear_about(&(Mat3::identity() * s), center)
    }

    /// Point reflection `x -> 2c - x`. Winding is reversed so the result
    /// stays outward-oriented.
    pub fn reflect_through_point(&self, c: &Vec3) -> Manifold {
        self.linear_about(&(-Mat3::identity()), c)
    }

    pub fn flip(&mut self) {
        for f in &mut self.faces {
            f.swap(1, 2);
        }
    }

    /// Drop vertices no face references.
    pub fn compacted(&self) -> Manifold {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let faces = self
            .faces
            .iter()
            .map(|f| {
                f.map(|i| {
                    if remap[i] == usize::MAX {
                        remap[i] = vertices.len();
                        vertices.push(self.vertices[i]);
                    }
                    remap[i]
                })
            })
            .collect();
        Manifold { vertices, faces }
    }

    /// Disjoint union of two meshes (no Boolean resolution).
    pub fn merged(&self, other: &Manifold) -> Manifold {
        let off = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| f.map(|i| i + off)));
        Manifold { vertices, faces }
    }

    /// Unsigned distance from `p` to the surface.
    pub fn distance_to_surface(&self, p: &Vec3) -> f64 {
        self.triangles()
            .map(|[a, b, c]| point_triangle_distance(p, &a, &b, &c))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Closest-point distance between `p` and triangle `abc`.
pub fn point_triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (p - closest_point_on_triangle(p, a, b, c)).norm()
}

pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    // region tests on barycentric coordinates
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = va + vb + vc;
    if denom.abs() < 1e-300 {
        // degenerate sliver: closest of the three edges
        let e = [(a, b), (b, c), (c, a)];
        return e
            .iter()
            .map(|(u, v)| closest_point_on_segment(p, u, v))
            .min_by(|x, y| (p - x).norm().total_cmp(&(p - y).norm()))
            .unwrap();
    }
    let v = vb / denom;
    let w = vc / denom;
    a + ab * v + ac * w
}

pub fn closest_point_on_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> Vec3 {
    let d = b - a;
    let l2 = d.norm_squared();
    if l2 == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&d) / l2).clamp(0.0, 1.0);
    a + d * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use approx::assert_relative_eq;

    #[test]
    fn unit_cube_volume() {
        let c = shapes::cuboid(&Vec3::zeros(), &Vec3::new(1.0, 1.0, 1.0));
        assert!(c.is_watertight());
        assert_relative_eq!(c.volume().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn open_mesh_is_rejected() {
        let mut c = shapes::cuboid(&Vec3::zeros(), &Vec3::new(1.0, 1.0, 1.0));
        c.faces.pop();
        assert!(matches!(c.volume(), Err(GeomError::NotWatertight)));
    }

    #[test]
    fn reflection_keeps_orientation() {
        let c = shapes::cuboid(&Vec3::new(1.0, 2.0, 3.0), &Vec3::new(2.0, 4.0, 7.0));
        let r = c.reflect_through_point(&Vec3::new(-5.0, 0.0, 1.0));
        assert_relative_eq!(r.volume().unwrap(), c.volume().unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn closest_point_regions() {
        let a = Vec3::zeros();
        let b = Vec3::x();
        let c = Vec3::y();
        assert_relative_eq!(point_triangle_distance(&Vec3::new(0.2, 0.2, 1.0), &a, &b, &c), 1.0);
        assert_relative_eq!(point_triangle_distance(&Vec3::new(-1.0, -1.0, 0.0), &a, &b, &c), 2f64.sqrt());
        assert_relative_eq!(point_triangle_distance(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c), 0.5f64.sqrt(), epsilon = 1e-12);
    }
}
