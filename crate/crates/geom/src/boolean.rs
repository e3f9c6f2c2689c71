use crate::assemble::polygons_to_manifold;
use crate::bsp::{self, Bsp, Polygon};
use crate::polytope::{intersect_convex, is_convex};
use crate::{GeomError, Manifold, Result, Vec3, EMPTY_VOLUME};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BooleanOp {
    Union,
    Intersection,
    Difference,
}

fn boxes_overlap(a: &Manifold, b: &Manifold) -> bool {
    match (a.bbox(), b.bbox()) {
        (Some((alo, ahi)), Some((blo, bhi))) => {
            let t = Vec3::repeat(1e-9);
            (alo - t).zip_map(&bhi, |x, y| x <= y).iter().all(|&v| v)
                && (blo - t).zip_map(&ahi, |x, y| x <= y).iter().all(|&v| v)
        }
        _ => false,
    }
}

/// Boolean combination of two closed meshes. Results below
/// [`EMPTY_VOLUME`] come back as the empty mesh.
pub fn boolean(a: &Manifold, b: &Manifold, op: BooleanOp) -> Result<Manifold> {
    use BooleanOp::*;
    match op {
        Union if a.is_empty() => return Ok(b.clone()),
        Union if b.is_empty() => return Ok(a.clone()),
        Intersection if a.is_empty() || b.is_empty() => return Ok(Manifold::empty()),
        Difference if a.is_empty() => return Ok(Manifold::empty()),
        Difference if b.is_empty() => return Ok(a.clone()),
        _ => {}
    }
    if !boxes_overlap(a, b) {
        return Ok(match op {
            Union => a.merged(b),
            Intersection => Manifold::empty(),
            Difference => a.clone(),
        });
    }
    if op == Intersection && is_convex(a, 1e-7) && is_convex(b, 1e-7) {
        return Ok(intersect_convex(a, b));
    }
    let (ta, tb) = (Bsp::from_manifold(a), Bsp::from_manifold(b));
    let polys = match op {
        Union => bsp::union(ta, tb),
        Intersection => bsp::intersect(ta, tb),
        Difference => bsp::subtract(ta, tb),
    };
    finish(polys)
}

fn finish(polys: Vec<Polygon>) -> Result<Manifold> {
    let raw: Vec<Vec<Vec3>> = polys.into_iter().map(|p| p.vertices).collect();
    let m = polygons_to_manifold(&raw);
    if m.is_empty() {
        return Ok(m);
    }
    if !m.is_watertight() {
        return Err(GeomError::DegenerateInput("boolean result is not closed".into()));
    }
    if m.signed_volume() < EMPTY_VOLUME {
        return Ok(Manifold::empty());
    }
    Ok(m)
}

pub fn union(a: &Manifold, b: &Manifold) -> Result<Manifold> {
    boolean(a, b, BooleanOp::Union)
}

pub fn intersection(a: &Manifold, b: &Manifold) -> Result<Manifold> {
    boolean(a, b, BooleanOp::Intersection)
}

pub fn difference(a: &Manifold, b: &Manifold) -> Result<Manifold> {
    boolean(a, b, BooleanOp::Difference)
}

/// Union of many meshes, folded pairwise in a balanced tree.
pub fn union_all(mut parts: Vec<Manifold>) -> Result<Manifold> {
    parts.retain(|m| !m.is_empty());
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(union(&a, &b)?),
                None => next.push(a),
            }
        }
        parts = next;
    }
    Ok(parts.pop().unwrap_or_default())
}

/// Intersection of many meshes; stops early once the result is empty.
pub fn intersection_all(parts: &[Manifold]) -> Result<Manifold> {
    let Some(first) = parts.first() else { return Ok(Manifold::empty()) };
    let mut acc = first.clone();
    for p in &parts[1..] {
        acc = intersection(&acc, p)?;
        if acc.is_empty() {
            break;
        }
    }
    Ok(acc)
}
