//! Joining spaces: robot workspace (C8), several features (C9) and several
//! imaging devices (C7).

use crate::cspace::{ConstrainedSpace, ConstraintTag, Reference, ReferenceFrame};
use crate::domain::RobotWorkspace;
use crate::error::{CspaceError, Result};
use cspace_geom::boolean::intersection;
use cspace_geom::{Manifold, Pose6D, Vec3};

/// Workspace of TCP positions expressed in the space's reference frame for
/// its fixed orientation. `tcp_to_lens` is the device mount.
pub fn workspace_in_reference(space: &ConstrainedSpace, w: &RobotWorkspace, tcp_to_lens: &Pose6D) -> Result<Manifold> {
    let r = space
        .rotation()
        .ok_or_else(|| CspaceError::Incompatible("workspace folding needs a fixed orientation".into()))?;
    Ok(match space.reference.frame {
        ReferenceFrame::Tcp => w.manifold().clone(),
        ReferenceFrame::Lens => {
            let r_tcp = r * tcp_to_lens.rotation.transpose();
            w.manifold().translated(&(r_tcp * tcp_to_lens.translation))
        }
    })
}

/// C8: intersect with the workspace (already in the space's frame).
pub fn c8_workspace(space: &ConstrainedSpace, workspace: &Manifold) -> Result<ConstrainedSpace> {
    let m = intersection(&space.manifold, workspace)?;
    let mut out = space.clone().with_manifold(m);
    out.push_tag(ConstraintTag::C8, "workspace");
    Ok(out)
}

/// C9: one viewpoint for all features.
pub fn c9_multifeature(spaces: &[ConstrainedSpace]) -> Result<ConstrainedSpace> {
    let first = spaces.first().ok_or_else(|| CspaceError::Config("no feature spaces to join".into()))?;
    if spaces.len() == 1 {
        return Ok(first.clone());
    }
    let mut acc = first.manifold.clone();
    for s in &spaces[1..] {
        first.compatible_with(s)?;
        if !acc.is_empty() {
            acc = intersection(&acc, &s.manifold)?;
        }
    }
    let mut out = first.clone().with_manifold(acc);
    for s in &spaces[1..] {
        for p in &s.provenance {
            if !out.provenance.contains(p) {
                out.provenance.push(p.clone());
            }
        }
    }
    out.push_tag(ConstraintTag::C9, format!("{} features", spaces.len()));
    Ok(out)
}

/// Translation taking a secondary-device space into primary-lens positions.
pub fn secondary_shift(primary_rotation: &cspace_geom::Mat3, t_12: &Pose6D) -> Vec3 {
    -(primary_rotation * t_12.translation)
}

/// C7: joint space of two devices, in primary reference positions.
/// `t_12` is the secondary lens pose in the primary lens frame.
pub fn c7_multidevice(primary: &ConstrainedSpace, secondary: &ConstrainedSpace, t_12: &Pose6D) -> Result<ConstrainedSpace> {
    let r1 = primary
        .rotation()
        .ok_or_else(|| CspaceError::Incompatible("C7 needs a fixed primary orientation".into()))?;
    let r2 = secondary
        .rotation()
        .ok_or_else(|| CspaceError::Incompatible("C7 needs a fixed secondary orientation".into()))?;
    if (r1 * t_12.rotation - r2).amax() > 1e-9 {
        return Err(CspaceError::Incompatible(format!(
            "{} orientation is not the primary orientation composed with the device offset",
            secondary.reference.device
        )));
    }
    let moved = secondary.manifold.translated(&secondary_shift(&r1, t_12));
    let m = intersection(&primary.manifold, &moved)?;
    let mut out = primary.clone().with_manifold(m);
    out.push_tag(ConstraintTag::C7, format!("with {}", secondary.reference.device));
    Ok(out)
}

/// Re-express a joint space (primary lens positions) as positions of the
/// secondary lens.
pub fn secondary_referenced(joint: &ConstrainedSpace, t_12: &Pose6D, secondary: Reference) -> Result<ConstrainedSpace> {
    let r1 = joint
        .rotation()
        .ok_or_else(|| CspaceError::Incompatible("needs a fixed orientation".into()))?;
    let mut out = joint.translated(&(r1 * t_12.translation));
    out.basis = None;
    out.reference = secondary;
    out.orientations = vec![r1 * t_12.rotation];
    Ok(out)
}
