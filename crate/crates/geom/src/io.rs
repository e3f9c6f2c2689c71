//! OBJ and STL (ASCII and binary) mesh files.

use crate::{GeomError, Manifold, Result, Vec3};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

pub fn write_obj_string(m: &Manifold) -> String {
    let mut s = String::with_capacity(m.vertices.len() * 40 + m.faces.len() * 20);
    for v in &m.vertices {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in &m.faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn write_obj(path: &Path, m: &Manifold) -> Result<()> {
    std::fs::write(path, write_obj_string(m))?;
    Ok(())
}

pub fn parse_obj(text: &str) -> Result<Manifold> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let err = |msg: &str| GeomError::Parse { line: ln + 1, msg: msg.to_string() };
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|_| err("bad vertex coordinate")))
                    .collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(err("vertex needs 3 coordinates"));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| err("bad face index"))?;
                        let i = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                        if i < 0 || i as usize >= vertices.len() {
                            return Err(err("face index out of range"));
                        }
                        Ok(i as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(err("face needs 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(Manifold::new(vertices, faces))
}

pub fn read_obj(path: &Path) -> Result<Manifold> {
    parse_obj(&std::fs::read_to_string(path)?)
}

pub fn write_stl_string(m: &Manifold, name: &str) -> String {
    let mut s = format!("solid {name}\n");
    for [a, b, c] in m.triangles() {
        let n = (b - a).cross(&(c - a));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        let _ = writeln!(s, "  facet normal {} {} {}\n    outer loop", n.x, n.y, n.z);
        for v in [a, b, c] {
            let _ = writeln!(s, "      vertex {} {} {}", v.x, v.y, v.z);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(s, "endsolid {name}");
    s
}

pub fn write_stl(path: &Path, m: &Manifold) -> Result<()> {
    std::fs::write(path, write_stl_string(m, "cspace"))?;
    Ok(())
}

fn index_triangles(tris: Vec<[Vec3; 3]>) -> Manifold {
    let mut map: HashMap<[u64; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::with_capacity(tris.len());
    for t in tris {
        let f = t.map(|v| {
            let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
            *map.entry(key).or_insert_with(|| {
                vertices.push(v);
                vertices.len() - 1
            })
        });
        faces.push(f);
    }
    Manifold::new(vertices, faces)
}

pub fn parse_stl(bytes: &[u8]) -> Result<Manifold> {
    let looks_ascii = bytes.starts_with(b"solid") && std::str::from_utf8(bytes).map_or(false, |s| s.contains("facet"));
    if looks_ascii {
        let text = std::str::from_utf8(bytes).unwrap();
        let mut tris = Vec::new();
        let mut cur = Vec::with_capacity(3);
        for (ln, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            if it.next() == Some("vertex") {
                let c: Vec<f64> = it.filter_map(|t| t.parse().ok()).collect();
                if c.len() != 3 {
                    return Err(GeomError::Parse { line: ln + 1, msg: "bad vertex".into() });
                }
                cur.push(Vec3::new(c[0], c[1], c[2]));
                if cur.len() == 3 {
                    tris.push([cur[0], cur[1], cur[2]]);
                    cur.clear();
                }
            }
        }
        return Ok(index_triangles(tris));
    }
    if bytes.len() < 84 {
        return Err(GeomError::Parse { line: 0, msg: "binary STL too short".into() });
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() < 84 + n * 50 {
        return Err(GeomError::Parse { line: 0, msg: "binary STL truncated".into() });
    }
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    let tris = (0..n)
        .map(|i| {
            let o = 84 + i * 50 + 12;
            [0, 1, 2].map(|k| Vec3::new(f(o + k * 12), f(o + k * 12 + 4), f(o + k * 12 + 8)))
        })
        .collect();
    Ok(index_triangles(tris))
}

pub fn read_stl(path: &Path) -> Result<Manifold> {
    parse_stl(&std::fs::read(path)?)
}

/// Dispatch on the file extension (`.obj` or `.stl`).
pub fn read_mesh(path: &Path) -> Result<Manifold> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref() {
        Some("stl") => read_stl(path),
        _ => read_obj(path),
    }
}

pub fn write_mesh(path: &Path, m: &Manifold) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref() {
        Some("stl") => write_stl(path, m),
        _ => write_obj(path, m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::icosahedron;

    #[test]
    fn obj_round_trip_is_exact() {
        let m = icosahedron(&Vec3::new(0.1, -2.3, 4.7), 14.0);
        let back = parse_obj(&write_obj_string(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn stl_round_trip_keeps_volume() {
        let m = icosahedron(&Vec3::zeros(), 14.0);
        let back = parse_stl(write_stl_string(&m, "x").as_bytes()).unwrap();
        assert!(back.is_watertight());
        assert!((back.volume().unwrap() - m.volume().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn obj_errors_carry_line_numbers() {
        let e = parse_obj("v 0 0 0\nf 1 2 3\n").unwrap_err();
        assert!(matches!(e, GeomError::Parse { line: 2, .. }));
    }
}
