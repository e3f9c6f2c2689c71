//! Per-vertex scaling of frustum-derived spaces: feature geometry (C3),
//! kinematic error budget (C4) and sensor working distance (C5), combined
//! by summing their scaling vectors.

use crate::cspace::{ConstrainedSpace, ConstraintTag};
use crate::domain::{feature_hull_points, DepthPlane, Feature, FeatureKind, Frustum, VertexRole};
use crate::error::{CspaceError, Result};
use cspace_geom::polytope::intersect_convex;
use cspace_geom::{EulerZyx, Pose6D, Vec3, EMPTY_VOLUME};

/// Angles below this (deg) count as zero when classifying rotations.
const ANGLE_EPS: f64 = 1e-7;

/// Inward displacement per frustum vertex, in the lens axes. Positive
/// components shrink the space.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVector {
    pub deltas: Vec<Vec3>,
    pub tag: ConstraintTag,
    pub note: String,
}

impl ScalingVector {
    pub fn uniform(n: usize, d: Vec3, tag: ConstraintTag, note: impl Into<String>) -> Self {
        ScalingVector { deltas: vec![d; n], tag, note: note.into() }
    }
}

/// Displacement of a vertex for an inward delta.
pub fn inward(role: &VertexRole, d: &Vec3) -> Vec3 {
    Vec3::new(-role.sx * d.x, -role.sy * d.y, role.sz() * d.z)
}

/// Auxiliary lengths for a single-axis tilt of a square feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxLengths {
    /// Depth offset of a tilted edge, `rho^{z}`.
    pub rho_z: f64,
    /// Projected half-width, `rho`.
    pub rho: f64,
    /// Lateral allowance lost along the tilt axis, `varsigma`.
    pub vs: f64,
    /// Lateral allowance lost across the tilt axis, `varsigma^{x,y}`.
    pub vs_cross: f64,
    pub lambda: f64,
    pub sigma: f64,
}

/// `fov_along` is the aperture in the tilted direction, `fov_across` the other.
pub fn aux_lengths(l_f: f64, tilt_deg: f64, fov_along_deg: f64, fov_across_deg: f64) -> AuxLengths {
    let half = l_f / 2.0;
    let t = tilt_deg.abs().to_radians();
    let rho_z = half * t.sin();
    let rho = half * t.cos();
    let vs = 2.0 * rho_z * (fov_along_deg / 2.0).to_radians().tan();
    let vs_cross = 2.0 * rho_z * (fov_across_deg / 2.0).to_radians().tan();
    AuxLengths { rho_z, rho, vs, vs_cross, lambda: rho - vs, sigma: rho + vs }
}

#[derive(Clone, Copy)]
enum Sym {
    L,
    R,
    S,
}

use Sym::{L, R, S};

// scaling-factor table, vertices 1..8; columns (negative, positive) angle
const Y_ROT_DX: [(Sym, Sym); 8] = [(L, R), (R, L), (S, R), (R, S), (L, R), (R, L), (S, R), (R, S)];
const X_ROT_DY: [(Sym, Sym); 8] = [(L, R), (L, R), (R, S), (R, S), (R, L), (R, L), (S, R), (S, R)];

fn pick(a: &AuxLengths, s: Sym) -> f64 {
    match s {
        L => a.lambda,
        R => a.rho,
        S => a.sigma,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RotationCase {
    Null,
    Z(f64),
    Y(f64),
    X(f64),
    Compound,
}

pub fn classify(r: &EulerZyx) -> RotationCase {
    let nz = |v: f64| v.abs() > ANGLE_EPS;
    match (nz(r.alpha), nz(r.beta), nz(r.gamma)) {
        (false, false, false) => RotationCase::Null,
        (true, false, false) => RotationCase::Z(r.alpha),
        (false, true, false) => RotationCase::Y(r.beta),
        (false, false, true) => RotationCase::X(r.gamma),
        _ => RotationCase::Compound,
    }
}

/// Closed-form C3 deltas for the 8-vertex frustum. `r_rel` is the device
/// orientation relative to the feature's viewing frame, `fov` the apertures
/// `(theta_x, psi_y)` in degrees.
pub fn c3_deltas(f: &Feature, r_rel: &EulerZyx, fov: (f64, f64)) -> Result<ScalingVector> {
    f.validate()?;
    let l = f.side_length_mm;
    let half = l / 2.0;
    let (tx, ty) = ((fov.0 / 2.0).to_radians().tan(), (fov.1 / 2.0).to_radians().tan());
    let near = |k: usize| matches!(k, 0 | 1 | 4 | 5);
    let note = format!("{} l={} h={}", f.id, l, f.height_mm);
    let out = |deltas: Vec<Vec3>| Ok(ScalingVector { deltas, tag: ConstraintTag::C3, note: note.clone() });

    if f.is_3d() {
        if classify(r_rel) != RotationCase::Null {
            return Err(CspaceError::UnsupportedOrientation(format!(
                "3-D feature {} needs the null rotation, got ({}, {}, {})",
                f.id, r_rel.alpha, r_rel.beta, r_rel.gamma
            )));
        }
        let h = f.height_mm;
        let deep = Vec3::new(h * tx + half, h * ty + half, h);
        let deltas = (0..8)
            .map(|k| match (f.kind, near(k)) {
                (FeatureKind::Concave, true) => Vec3::new(half, half, 0.0),
                (FeatureKind::Concave, false) => deep,
                (_, true) => deep,
                (_, false) => Vec3::new(deep.x, deep.y, 0.0),
            })
            .collect();
        return out(deltas);
    }
    if l == 0.0 {
        return out(vec![Vec3::zeros(); 8]);
    }
    match classify(r_rel) {
        RotationCase::Null => out(vec![Vec3::new(half, half, 0.0); 8]),
        RotationCase::Z(a) => {
            let a = (a.abs() % 90.0).to_radians();
            let d = half * (a.cos() + a.sin());
            out(vec![Vec3::new(d, d, 0.0); 8])
        }
        RotationCase::Y(b) => {
            let aux = aux_lengths(l, b, fov.0, fov.1);
            let deltas = (0..8)
                .map(|k| {
                    let (neg, pos) = Y_ROT_DX[k];
                    let dx = pick(&aux, if b < 0.0 { neg } else { pos });
                    let dy = if near(k) { half } else { half + aux.vs_cross };
                    Vec3::new(dx, dy, aux.rho_z)
                })
                .collect();
            out(deltas)
        }
        RotationCase::X(g) => {
            let aux = aux_lengths(l, g, fov.1, fov.0);
            let deltas = (0..8)
                .map(|k| {
                    let (neg, pos) = X_ROT_DY[k];
                    let dy = pick(&aux, if g < 0.0 { neg } else { pos });
                    let dx = if near(k) { half } else { half + aux.vs_cross };
                    Vec3::new(dx, dy, aux.rho_z)
                })
                .collect();
            out(deltas)
        }
        RotationCase::Compound => Err(CspaceError::UnsupportedOrientation(format!(
            "compound rotation ({}, {}, {}) for {}",
            r_rel.alpha, r_rel.beta, r_rel.gamma, f.id
        ))),
    }
}

/// C3 by closed-form scaling of a frustum-derived space.
pub fn c3_scaling(base: &ConstrainedSpace, f: &Feature, r_rel: &EulerZyx, fov: (f64, f64)) -> Result<ConstrainedSpace> {
    let n = base.basis.as_ref().map_or(0, |b| b.local.len());
    if n != 8 {
        return Err(CspaceError::VertexCountMismatch { expected: 8, got: n });
    }
    apply_scaling_sum(base, &[c3_deltas(f, r_rel, fov)?])
}

/// C3 without closed form: intersect copies of the base anchored at every
/// feature hull point. Exact for any orientation and frustum shape.
pub fn c3_erosion(base: &ConstrainedSpace, f: &Feature, feature_world: &Pose6D) -> Result<ConstrainedSpace> {
    f.validate()?;
    let anchor = base
        .basis
        .as_ref()
        .map(|b| b.anchor)
        .ok_or_else(|| CspaceError::Incompatible("erosion needs a frustum-derived space".into()))?;
    let mut acc = base.manifold.clone();
    for p in feature_hull_points(f) {
        let shift = feature_world.transform_point(&p) - anchor;
        if shift.norm() == 0.0 {
            continue;
        }
        acc = intersect_convex(&acc, &base.manifold.translated(&shift));
        if acc.is_empty() {
            break;
        }
    }
    let mut out = base.clone().with_manifold(acc);
    out.push_tag(ConstraintTag::C3, format!("{} by hull-point intersection", f.id));
    Ok(out)
}

/// Uniform C4 deltas from a per-axis total error.
pub fn c4_deltas(n: usize, eps: &Vec3) -> ScalingVector {
    ScalingVector::uniform(n, *eps, ConstraintTag::C4, format!("eps=({},{},{})", eps.x, eps.y, eps.z))
}

/// C5 deltas clipping the working distance to `[z_min, z_max]` (lens z):
/// near and far vertices slide along the lateral frustum edges.
pub fn c5_deltas(frustum: &Frustum, z_min: f64, z_max: f64) -> Result<ScalingVector> {
    if frustum.vertices.len() != 8 {
        return Err(CspaceError::VertexCountMismatch { expected: 8, got: frustum.vertices.len() });
    }
    if !(z_min < z_max) {
        return Err(CspaceError::Config(format!("accuracy range [{z_min}, {z_max}] is empty")));
    }
    let partner = |k: usize| -> usize {
        let r = frustum.roles[k];
        frustum
            .roles
            .iter()
            .position(|o| o.sx == r.sx && o.sy == r.sy && o.plane != r.plane)
            .expect("frustum has near/far pairs")
    };
    let mut deltas = Vec::with_capacity(8);
    for k in 0..8 {
        let role = frustum.roles[k];
        let (u, w) = (frustum.vertices[k], frustum.vertices[partner(k)]);
        let (hn, hf) = match role.plane {
            DepthPlane::Near => (u.z, w.z),
            _ => (w.z, u.z),
        };
        let t = match role.plane {
            DepthPlane::Near => ((z_min - hn) / (hf - hn)).max(0.0),
            _ => ((hf - z_max) / (hf - hn)).max(0.0),
        };
        let disp = (w - u) * t;
        deltas.push(Vec3::new(-role.sx * disp.x, -role.sy * disp.y, role.sz() * disp.z));
    }
    Ok(ScalingVector { deltas, tag: ConstraintTag::C5, note: format!("z in [{z_min}, {z_max}]") })
}

/// `V_k = V_k(base) - sum_i Delta_k(c_i)`, applied in the lens axes.
pub fn apply_scaling_sum(base: &ConstrainedSpace, scalings: &[ScalingVector]) -> Result<ConstrainedSpace> {
    let basis = base
        .basis
        .as_ref()
        .ok_or_else(|| CspaceError::Incompatible("space has no frustum basis to scale".into()))?;
    let n = basis.local.len();
    for s in scalings {
        if s.deltas.len() != n {
            return Err(CspaceError::VertexCountMismatch { expected: n, got: s.deltas.len() });
        }
        if s.deltas.iter().any(|d| !d.iter().all(|c| c.is_finite())) {
            return Err(CspaceError::InvalidParams(format!("{} scaling is not finite", s.tag)));
        }
    }
    let mut b = basis.clone();
    for (k, v) in b.local.iter_mut().enumerate() {
        for s in scalings {
            *v += inward(&b.roles[k], &s.deltas[k]);
        }
    }
    check_not_collapsed(&b.local, &b.roles)?;
    let mut out = base.clone();
    out.manifold = b.manifold();
    if out.manifold.signed_volume() < EMPTY_VOLUME {
        return Err(CspaceError::CollapsedSpace("scaled space has no volume".into()));
    }
    out.basis = Some(b);
    for s in scalings {
        out.push_tag(s.tag, s.note.clone());
    }
    Ok(out)
}

fn check_not_collapsed(local: &[Vec3], roles: &[VertexRole]) -> Result<()> {
    for (k, r) in roles.iter().enumerate() {
        for (j, o) in roles.iter().enumerate() {
            if o.plane == r.plane && o.sy == r.sy && r.sx > 0.0 && o.sx < 0.0 && local[k].x < local[j].x - 1e-9 {
                return Err(CspaceError::CollapsedSpace(format!("vertices {} and {} crossed in x", k + 1, j + 1)));
            }
            if o.plane == r.plane && o.sx == r.sx && r.sy > 0.0 && o.sy < 0.0 && local[k].y < local[j].y - 1e-9 {
                return Err(CspaceError::CollapsedSpace(format!("vertices {} and {} crossed in y", k + 1, j + 1)));
            }
            if o.sx == r.sx && o.sy == r.sy && r.plane == DepthPlane::Near && o.plane == DepthPlane::Far && local[k].z > local[j].z - 1e-9 {
                return Err(CspaceError::CollapsedSpace(format!("vertices {} and {} crossed in z", k + 1, j + 1)));
            }
        }
    }
    Ok(())
}
