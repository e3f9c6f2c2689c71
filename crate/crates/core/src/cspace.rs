//! Core C-spaces: the set of reference-frame positions from which a
//! feature point lies inside the frustum at a fixed orientation (C1) and
//! its intersection over sampled orientation ranges (C2).

use crate::domain::{Frustum, ImagingDevice, VertexRole};
use crate::error::{CspaceError, Result};
use cspace_geom::boolean::intersection;
use cspace_geom::polytope::{intersect_convex, is_convex};
use cspace_geom::{EulerZyx, Manifold, Mat3, Pose6D, Vec3};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintTag {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    C9,
}

impl ConstraintTag {
    pub const ALL: [ConstraintTag; 9] = [
        ConstraintTag::C1,
        ConstraintTag::C2,
        ConstraintTag::C3,
        ConstraintTag::C4,
        ConstraintTag::C5,
        ConstraintTag::C6,
        ConstraintTag::C7,
        ConstraintTag::C8,
        ConstraintTag::C9,
    ];

    pub fn parse(s: &str) -> Option<ConstraintTag> {
        ConstraintTag::ALL.iter().copied().find(|t| t.to_string().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", *self as u8 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceFrame {
    /// Positions of the device lens frame.
    Lens,
    /// Positions of the sensor TCP.
    Tcp,
}

impl fmt::Display for ReferenceFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceFrame::Lens => "lens",
            ReferenceFrame::Tcp => "tcp",
        })
    }
}

/// Which frame a C-space describes, and for which device.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub device: String,
    pub frame: ReferenceFrame,
    /// Lens pose in the reference frame (identity for [`ReferenceFrame::Lens`]).
    pub mount: Pose6D,
}

impl Reference {
    pub fn lens(device: &ImagingDevice) -> Reference {
        Reference { device: device.id.clone(), frame: ReferenceFrame::Lens, mount: Pose6D::identity() }
    }

    pub fn tcp(device: &ImagingDevice) -> Reference {
        Reference { device: device.id.clone(), frame: ReferenceFrame::Tcp, mount: device.mount }
    }

    pub fn new(device: &ImagingDevice, frame: ReferenceFrame) -> Reference {
        match frame {
            ReferenceFrame::Lens => Reference::lens(device),
            ReferenceFrame::Tcp => Reference::tcp(device),
        }
    }
}

/// Frustum-derived space that can still be scaled vertex by vertex:
/// `V_k = anchor - R * mount(local_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrustumBasis {
    /// Frustum vertices in the lens frame after all scalings so far.
    pub local: Vec<Vec3>,
    pub roles: Vec<VertexRole>,
    pub faces: Vec<[usize; 3]>,
    pub mount: Pose6D,
    pub rotation: Mat3,
    pub anchor: Vec3,
}

impl FrustumBasis {
    pub fn new(frustum: &Frustum, reference: &Reference, rotation: Mat3, anchor: Vec3) -> FrustumBasis {
        FrustumBasis {
            local: frustum.vertices.clone(),
            roles: frustum.roles.clone(),
            faces: frustum.faces.clone(),
            mount: reference.mount,
            rotation,
            anchor,
        }
    }

    pub fn vertex(&self, k: usize) -> Vec3 {
        self.anchor - self.rotation * self.mount.transform_point(&self.local[k])
    }

    /// Point reflection reverses orientation, so the winding is flipped.
    pub fn manifold(&self) -> Manifold {
        let vertices = (0..self.local.len()).map(|k| self.vertex(k)).collect();
        let faces = self.faces.iter().map(|f| [f[0], f[2], f[1]]).collect();
        Manifold::new(vertices, faces)
    }

    /// The current (scaled) frustum in the lens frame.
    pub fn frustum(&self) -> Frustum {
        Frustum { vertices: self.local.clone(), roles: self.roles.clone(), faces: self.faces.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct ConstrainedSpace {
    pub manifold: Manifold,
    pub reference: Reference,
    /// Constraint tags with short parameter notes, in application order.
    pub provenance: Vec<(ConstraintTag, String)>,
    /// Device world rotations the space is valid for (one when fixed).
    pub orientations: Vec<Mat3>,
    pub basis: Option<FrustumBasis>,
    /// Set once an occlusion difference made the space non-convex.
    pub post_occlusion: bool,
    pub diagnostics: Vec<String>,
}

impl ConstrainedSpace {
    pub fn from_basis(basis: FrustumBasis, reference: Reference, tag: ConstraintTag, note: String) -> Self {
        ConstrainedSpace {
            manifold: basis.manifold(),
            reference,
            provenance: vec![(tag, note)],
            orientations: vec![basis.rotation],
            basis: Some(basis),
            post_occlusion: false,
            diagnostics: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.manifold.is_empty()
    }

    pub fn volume(&self) -> f64 {
        if self.manifold.is_empty() {
            0.0
        } else {
            self.manifold.signed_volume()
        }
    }

    pub fn tags(&self) -> Vec<ConstraintTag> {
        let mut t: Vec<ConstraintTag> = self.provenance.iter().map(|(t, _)| *t).collect();
        t.sort();
        t.dedup();
        t
    }

    pub fn has(&self, tag: ConstraintTag) -> bool {
        self.provenance.iter().any(|(t, _)| *t == tag)
    }

    pub fn push_tag(&mut self, tag: ConstraintTag, note: impl Into<String>) {
        self.provenance.push((tag, note.into()));
    }

    /// The fixed orientation, if there is exactly one.
    pub fn rotation(&self) -> Option<Mat3> {
        (self.orientations.len() == 1).then(|| self.orientations[0])
    }

    /// Replace the mesh by a general one; per-vertex scaling no longer applies.
    pub fn with_manifold(mut self, m: Manifold) -> Self {
        self.manifold = m;
        self.basis = None;
        self
    }

    pub fn translated(&self, t: &Vec3) -> Self {
        let mut out = self.clone();
        out.manifold = self.manifold.translated(t);
        if let Some(b) = out.basis.as_mut() {
            b.anchor += t;
        }
        out
    }

    /// Check two spaces describe the same frame and orientation set.
    pub fn compatible_with(&self, other: &ConstrainedSpace) -> Result<()> {
        if self.reference.device != other.reference.device || self.reference.frame != other.reference.frame {
            return Err(CspaceError::Incompatible(format!(
                "reference {}:{} vs {}:{}",
                self.reference.device, self.reference.frame, other.reference.device, other.reference.frame
            )));
        }
        let same = self.orientations.len() == other.orientations.len()
            && self.orientations.iter().zip(&other.orientations).all(|(a, b)| (a - b).amax() < 1e-9);
        if !same {
            return Err(CspaceError::Incompatible("orientation sets differ".into()));
        }
        Ok(())
    }
}

/// World rotation for an orientation given relative to `frame`.
pub fn world_rotation(frame: &Pose6D, r_fix: &EulerZyx) -> Mat3 {
    frame.rotation * r_fix.matrix()
}

fn describe(e: &EulerZyx) -> String {
    format!("r=({:.4},{:.4},{:.4})", e.alpha, e.beta, e.gamma)
}

/// C1 from extreme viewpoints: `V_k = g0 - R u_k`, `g0` the feature frame
/// origin and `u_k` frustum vertex k in the reference frame.
pub fn c1_extreme(feature_frame: &Pose6D, frustum: &Frustum, r_fix: &EulerZyx, reference: &Reference) -> ConstrainedSpace {
    let r = world_rotation(feature_frame, r_fix);
    let basis = FrustumBasis::new(frustum, reference, r, feature_frame.translation);
    ConstrainedSpace::from_basis(basis, reference.clone(), crate::cspace::ConstraintTag::C1, describe(r_fix))
}

/// C1 by the homeomorphism route: point-reflect the frustum (in reference
/// coordinates) through its geometric centre, then pose it rigidly so the
/// reflected reference frame sits at the feature.
pub fn c1_homeomorphism(
    feature_frame: &Pose6D,
    frustum: &Frustum,
    r_fix: &EulerZyx,
    reference: &Reference,
) -> ConstrainedSpace {
    let r = world_rotation(feature_frame, r_fix);
    let in_ref = frustum.manifold().transformed(&reference.mount);
    let c = in_ref.vertex_centroid();
    let reflected = in_ref.reflect_through_point(&c);
    // x* = 2c - u, so g0 - R u = R x* + (g0 - 2 R c)
    let place = Pose6D::from_parts(feature_frame.translation - 2.0 * (r * c), r);
    let manifold = reflected.transformed(&place);
    let basis = FrustumBasis::new(frustum, reference, r, feature_frame.translation);
    ConstrainedSpace {
        manifold,
        reference: reference.clone(),
        provenance: vec![(ConstraintTag::C1, describe(r_fix))],
        orientations: vec![r],
        basis: Some(basis),
        post_occlusion: false,
        diagnostics: Vec::new(),
    }
}

/// Sampled orientation range, Euler angles in degrees relative to the
/// feature frame. C2 enumerates the Cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationRange {
    pub alpha_z: Vec<f64>,
    pub beta_y: Vec<f64>,
    pub gamma_x: Vec<f64>,
}

impl OrientationRange {
    pub fn new(alpha_z: Vec<f64>, beta_y: Vec<f64>, gamma_x: Vec<f64>) -> Result<Self> {
        let mut r = OrientationRange { alpha_z, beta_y, gamma_x };
        for v in [&mut r.alpha_z, &mut r.beta_y, &mut r.gamma_x] {
            if v.is_empty() || v.iter().any(|a| !a.is_finite()) {
                return Err(CspaceError::Config("orientation range axes need finite samples".into()));
            }
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        Ok(r)
    }

    pub fn fixed(e: EulerZyx) -> Self {
        OrientationRange { alpha_z: vec![e.alpha], beta_y: vec![e.beta], gamma_x: vec![e.gamma] }
    }

    /// Samples `min, min+step, ...` up to and including `max`.
    pub fn stepped(min: f64, max: f64, step: f64) -> Vec<f64> {
        if !(step > 0.0) || max <= min {
            return vec![min];
        }
        let n = ((max - min) / step + 1e-9).floor() as usize;
        let mut v: Vec<f64> = (0..=n).map(|i| min + i as f64 * step).collect();
        if (v[n] - max).abs() > 1e-9 {
            v.push(max);
        }
        v
    }

    pub fn combinations(&self) -> Vec<EulerZyx> {
        let mut out = Vec::with_capacity(self.alpha_z.len() * self.beta_y.len() * self.gamma_x.len());
        for &a in &self.alpha_z {
            for &b in &self.beta_y {
                for &g in &self.gamma_x {
                    out.push(EulerZyx::new(a, b, g));
                }
            }
        }
        out
    }
}

/// Intersection of C1 over every orientation in the range.
pub fn c2_orientation_range(
    feature_frame: &Pose6D,
    frustum: &Frustum,
    range: &OrientationRange,
    reference: &Reference,
) -> Result<ConstrainedSpace> {
    let combos = range.combinations();
    let first = c1_extreme(feature_frame, frustum, &combos[0], reference);
    if combos.len() == 1 {
        return Ok(first);
    }
    let convex = is_convex(&first.manifold, 1e-7);
    let mut acc = first.manifold.clone();
    let mut orientations = Vec::with_capacity(combos.len());
    for e in &combos {
        let c = c1_extreme(feature_frame, frustum, e, reference);
        orientations.push(c.orientations[0]);
        if !acc.is_empty() && !std::ptr::eq(e, &combos[0]) {
            acc = if convex { intersect_convex(&acc, &c.manifold) } else { intersection(&acc, &c.manifold)? };
        }
    }
    Ok(ConstrainedSpace {
        manifold: acc,
        reference: reference.clone(),
        provenance: vec![
            (ConstraintTag::C1, "per orientation".into()),
            (ConstraintTag::C2, format!("{} orientations", combos.len())),
        ],
        orientations,
        basis: None,
        post_occlusion: false,
        diagnostics: Vec::new(),
    })
}
