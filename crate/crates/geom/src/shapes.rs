//! Primitive solids used for fixtures, occluders and workspaces.

use crate::{hull::convex_hull, Manifold, Vec3};
use std::f64::consts::{FRAC_PI_2, PI};

/// Quads listed counter-clockwise seen from outside, split into triangles.
pub fn quads_to_triangles(quads: &[[usize; 4]]) -> Vec<[usize; 3]> {
    quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect()
}

/// Axis-aligned box between `lo` and `hi`.
pub fn cuboid(lo: &Vec3, hi: &Vec3) -> Manifold {
    let v = |x: bool, y: bool, z: bool| {
        Vec3::new(if x { hi.x } else { lo.x }, if y { hi.y } else { lo.y }, if z { hi.z } else { lo.z })
    };
    let vertices = vec![
        v(false, false, false),
        v(true, false, false),
        v(true, true, false),
        v(false, true, false),
        v(false, false, true),
        v(true, false, true),
        v(true, true, true),
        v(false, true, true),
    ];
    let quads = [
        [0, 3, 2, 1], // z-
        [4, 5, 6, 7], // z+
        [0, 1, 5, 4], // y-
        [2, 3, 7, 6], // y+
        [0, 4, 7, 3], // x-
        [1, 2, 6, 5], // x+
    ];
    Manifold::new(vertices, quads_to_triangles(&quads))
}

pub fn centered_box(center: &Vec3, size: &Vec3) -> Manifold {
    cuboid(&(center - size / 2.0), &(center + size / 2.0))
}

/// Regular icosahedron with the given edge length.
pub fn icosahedron(center: &Vec3, edge: f64) -> Manifold {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    // canonical coordinates have edge length 2
    let s = edge / 2.0;
    let mut pts = Vec::with_capacity(12);
    for &a in &[-1.0, 1.0] {
        for &b in &[-phi, phi] {
            pts.push(Vec3::new(0.0, a, b));
            pts.push(Vec3::new(a, b, 0.0));
            pts.push(Vec3::new(b, 0.0, a));
        }
    }
    let pts: Vec<Vec3> = pts.into_iter().map(|p| center + p * s).collect();
    convex_hull(&pts).expect("icosahedron hull")
}

/// Regular octahedron with the given edge length.
pub fn octahedron(center: &Vec3, edge: f64) -> Manifold {
    let r = edge / 2f64.sqrt();
    let pts = [
        Vec3::x(),
        -Vec3::x(),
        Vec3::y(),
        -Vec3::y(),
        Vec3::z(),
        -Vec3::z(),
    ]
    .map(|d| center + d * r);
    convex_hull(&pts).expect("octahedron hull")
}

/// Closed half-shell `r_in <= |p - c| <= r_out`, `z >= c.z`, with vertices on
/// both spheres (inscribed facets).
pub fn hollow_half_sphere(center: &Vec3, r_in: f64, r_out: f64, n_az: usize, n_el: usize) -> Manifold {
    assert!(n_az >= 3 && n_el >= 1 && r_out > r_in && r_in > 0.0);
    let mut vertices = Vec::new();
    // ring j = 0..n_el-1 at elevation j*90/n_el, then the pole
    let mut push_shell = |r: f64| -> usize {
        let base = vertices.len();
        for j in 0..n_el {
            let el = FRAC_PI_2 * j as f64 / n_el as f64;
            for i in 0..n_az {
                let az = 2.0 * PI * i as f64 / n_az as f64;
                vertices.push(center + r * Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()));
            }
        }
        vertices.push(center + Vec3::new(0.0, 0.0, r));
        base
    };
    let outer = push_shell(r_out);
    let inner = push_shell(r_in);
    let idx = |base: usize, j: usize, i: usize| base + j * n_az + (i % n_az);
    let pole = |base: usize| base + n_el * n_az;
    let mut faces = Vec::new();
    for (base, outward) in [(outer, true), (inner, false)] {
        for j in 0..n_el {
            for i in 0..n_az {
                let a = idx(base, j, i);
                let b = idx(base, j, i + 1);
                let (c, d) = if j + 1 < n_el {
                    (idx(base, j + 1, i + 1), idx(base, j + 1, i))
                } else {
                    (pole(base), pole(base))
                };
                let mut tris = vec![[a, b, c]];
                if c != d {
                    tris.push([a, c, d]);
                }
                for t in tris {
                    faces.push(if outward { t } else { [t[0], t[2], t[1]] });
                }
            }
        }
    }
    // bottom annulus facing -z
    for i in 0..n_az {
        let (o0, o1) = (idx(outer, 0, i), idx(outer, 0, i + 1));
        let (i0, i1) = (idx(inner, 0, i), idx(inner, 0, i + 1));
        faces.push([o0, i0, i1]);
        faces.push([o0, i1, o1]);
    }
    Manifold::new(vertices, faces)
}

/// Solid sphere approximated by a UV mesh.
pub fn uv_sphere(center: &Vec3, r: f64, n_az: usize, n_el: usize) -> Manifold {
    let mut pts = Vec::new();
    for j in 1..n_el {
        let el = -FRAC_PI_2 + PI * j as f64 / n_el as f64;
        for i in 0..n_az {
            let az = 2.0 * PI * i as f64 / n_az as f64;
            pts.push(center + r * Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()));
        }
    }
    pts.push(center + Vec3::new(0.0, 0.0, r));
    pts.push(center - Vec3::new(0.0, 0.0, r));
    convex_hull(&pts).expect("sphere hull")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn icosahedron_edge_and_volume() {
        let m = icosahedron(&Vec3::new(1.0, 2.0, 3.0), 14.0);
        assert_eq!(m.vertices.len(), 12);
        assert_eq!(m.faces.len(), 20);
        let [a, b, _] = m.triangle(0);
        assert_relative_eq!((a - b).norm(), 14.0, epsilon = 1e-9);
        let expect = 5.0 * (3.0 + 5f64.sqrt()) / 12.0 * 14f64.powi(3);
        assert_relative_eq!(m.volume().unwrap(), expect, max_relative = 1e-12);
    }

    #[test]
    fn octahedron_volume() {
        let m = octahedron(&Vec3::zeros(), 20.0);
        assert_eq!(m.faces.len(), 8);
        let expect = 2f64.sqrt() / 3.0 * 20f64.powi(3);
        assert_relative_eq!(m.volume().unwrap(), expect, max_relative = 1e-12);
    }

    #[test]
    fn half_shell_is_closed_and_converges() {
        let m = hollow_half_sphere(&Vec3::zeros(), 1000.0, 1800.0, 96, 24);
        assert!(m.is_watertight());
        let exact = 2.0 / 3.0 * PI * (1800f64.powi(3) - 1000f64.powi(3));
        let v = m.volume().unwrap();
        assert!(v > 0.0 && (v - exact).abs() / exact < 5e-3, "{v} vs {exact}");
    }
}
