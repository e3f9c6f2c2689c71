//! Integration of all constraints into one C-space per imaging device.
//!
//! Per device and feature the frustum-derived space is built and scaled
//! (C5, C4, C3). Everything is then expressed in reference-lens positions
//! and folded by intersection (C9 across features, C7 across devices, C8
//! workspace); the occlusion union (C6) is subtracted last.

use crate::cspace::{c1_extreme, ConstrainedSpace, ConstraintTag, OrientationRange, Reference, ReferenceFrame};
use crate::domain::{incidence_angle, Feature, ImagingDevice, Scene};
use crate::error::{CspaceError, Result};
use crate::joint::workspace_in_reference;
use crate::occlusion::{occlusion_space, OcclusionSpace, DEFAULT_HULL_SCALE};
use crate::scaling::{apply_scaling_sum, c3_deltas, c3_erosion, c4_deltas, c5_deltas, inward, ScalingVector};
use crate::verify::{CheckSpec, DeviceCheck};
use cspace_geom::boolean::{difference, intersection};
use cspace_geom::pose::{matrix_to_euler, rot_x};
use cspace_geom::{EulerZyx, Manifold, Mat3, Pose6D, Vec3};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct Plan {
    /// Device whose positions the joint space is first expressed in.
    pub reference_device: String,
    pub reference_frame: ReferenceFrame,
    /// Reference lens orientation relative to the object viewing frame
    /// (object frame turned 180 deg about x).
    pub orientation: EulerZyx,
    /// Optional sampled range; replaces `orientation` when present.
    pub range: Option<OrientationRange>,
    pub constraints: BTreeSet<ConstraintTag>,
    /// Feature ids; empty means all scene features.
    pub features: Vec<String>,
    /// Device ids; empty means all scene devices.
    pub devices: Vec<String>,
    pub ray_step_deg: f64,
    pub hull_scale: f64,
}

impl Plan {
    pub fn new(reference_device: &str, orientation: EulerZyx) -> Plan {
        Plan {
            reference_device: reference_device.to_string(),
            reference_frame: ReferenceFrame::Lens,
            orientation,
            range: None,
            constraints: ConstraintTag::ALL.into_iter().collect(),
            features: Vec::new(),
            devices: Vec::new(),
            ray_step_deg: 0.5,
            hull_scale: DEFAULT_HULL_SCALE,
        }
    }

    pub fn with_constraints(mut self, tags: &[ConstraintTag]) -> Plan {
        self.constraints = tags.iter().copied().collect();
        self.constraints.insert(ConstraintTag::C1);
        self
    }

    pub fn uses(&self, tag: ConstraintTag) -> bool {
        self.constraints.contains(&tag)
    }

    fn feature_list<'a>(&self, scene: &'a Scene) -> Result<Vec<&'a Feature>> {
        if self.features.is_empty() {
            return Ok(scene.features.iter().collect());
        }
        self.features.iter().map(|id| scene.feature(id)).collect()
    }

    /// Reference device first, then the others in plan (or scene) order.
    fn device_list(&self, scene: &Scene) -> Result<Vec<String>> {
        scene.device(&self.reference_device)?;
        let mut ids = vec![self.reference_device.clone()];
        let rest = if self.devices.is_empty() { scene.device_ids() } else { self.devices.clone() };
        for id in rest {
            scene.device(&id)?;
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        if !(self.uses(ConstraintTag::C7)) {
            ids.truncate(1);
        }
        Ok(ids)
    }
}

/// Object viewing frame rotation; plan orientations are relative to it.
pub fn orientation_base(scene: &Scene) -> Mat3 {
    scene.object_pose.rotation * rot_x(180.0)
}

/// One intersection operand, already in reference-lens positions.
#[derive(Debug, Clone)]
pub struct FoldTerm {
    pub tag: ConstraintTag,
    pub label: String,
    pub manifold: Manifold,
}

/// Everything needed to fold a fixed orientation.
#[derive(Debug, Clone)]
pub struct FoldInput {
    pub rotation: Mat3,
    pub terms: Vec<FoldTerm>,
    /// Per device and feature occlusion spaces, reference-lens positions.
    pub occlusions: Vec<(String, OcclusionSpace)>,
    /// Lens offsets of every device from the reference lens.
    pub offsets: Vec<(String, Pose6D)>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct StageStat {
    pub tag: ConstraintTag,
    pub label: String,
    pub volume: f64,
    pub vertices: usize,
    pub faces: usize,
    pub millis: f64,
}

#[derive(Debug, Clone)]
pub struct FoldOutput {
    pub manifold: Manifold,
    pub stages: Vec<StageStat>,
    /// Label of the first operand after which the space was empty.
    pub emptied_by: Option<(ConstraintTag, String)>,
}

/// Intersect the terms in `order`, then subtract the occlusion union.
pub fn fold(input: &FoldInput, order: &[usize]) -> Result<FoldOutput> {
    let mut stages = Vec::new();
    let mut emptied_by = None;
    let mut acc: Option<Manifold> = None;
    for &i in order {
        let t = &input.terms[i];
        let start = Instant::now();
        let next = match &acc {
            None => t.manifold.clone(),
            Some(a) if a.is_empty() => Manifold::empty(),
            Some(a) => intersection(a, &t.manifold)?,
        };
        if next.is_empty() && emptied_by.is_none() {
            emptied_by = Some((t.tag, t.label.clone()));
        }
        stages.push(stat(t.tag, &t.label, &next, start));
        acc = Some(next);
    }
    let mut m = acc.unwrap_or_default();
    // subtracting hull by hull equals subtracting their union and avoids
    // building the (much larger) union mesh
    let parts: Vec<&OcclusionSpace> = input.occlusions.iter().map(|(_, o)| o).filter(|o| !o.is_empty()).collect();
    if !parts.is_empty() && !m.is_empty() {
        let start = Instant::now();
        for o in parts {
            if m.is_empty() {
                break;
            }
            m = difference(&m, &o.manifold)?;
        }
        if m.is_empty() {
            emptied_by = Some((ConstraintTag::C6, "occlusion".into()));
        }
        stages.push(stat(ConstraintTag::C6, "occlusion difference", &m, start));
    }
    Ok(FoldOutput { manifold: m, stages, emptied_by })
}

fn stat(tag: ConstraintTag, label: &str, m: &Manifold, start: Instant) -> StageStat {
    StageStat {
        tag,
        label: label.to_string(),
        volume: if m.is_empty() { 0.0 } else { m.signed_volume() },
        vertices: m.vertices.len(),
        faces: m.faces.len(),
        millis: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Constraint tags that shrink the frustum itself: working distance then
/// error budget.
fn frustum_scalings(scene: &Scene, plan: &Plan, dev: &ImagingDevice, frustum: &crate::domain::Frustum) -> Result<Vec<ScalingVector>> {
    let mut v = Vec::new();
    if plan.uses(ConstraintTag::C5) {
        if let Some((z0, z1)) = dev.accuracy_z_mm {
            v.push(c5_deltas(frustum, z0, z1)?);
        }
    }
    if plan.uses(ConstraintTag::C4) && !scene.error_budget.is_zero() {
        v.push(c4_deltas(frustum.vertices.len(), &scene.error_budget.total()));
    }
    Ok(v)
}

/// Per device and feature space at a fixed device lens rotation.
pub fn feature_space(
    scene: &Scene,
    plan: &Plan,
    dev: &ImagingDevice,
    max_incidence_deg: f64,
    feature: &Feature,
    r_dev: &Mat3,
) -> Result<ConstrainedSpace> {
    let frustum = dev.params.frustum()?;
    let view = feature.viewing_frame(&scene.object_pose);
    let rel = matrix_to_euler(&(view.rotation.transpose() * r_dev));
    let reference = Reference::lens(dev);
    let mut space = c1_extreme(&view, &frustum, &rel, &reference);
    // rounding in the Euler round trip must not tilt the manifold
    if let Some(b) = space.basis.as_mut() {
        b.rotation = *r_dev;
    }
    space.orientations = vec![*r_dev];
    space.manifold = space.basis.as_ref().expect("c1 has a basis").manifold();

    let axis = r_dev.column(2).into_owned();
    let normal = feature.world_frame(&scene.object_pose).rotation.column(2).into_owned();
    let phi = incidence_angle(&normal, &axis);
    if phi.abs() >= max_incidence_deg {
        let mut e = space.with_manifold(Manifold::empty());
        e.diagnostics.push(format!("{}/{}: incidence {:.2} deg >= {:.2}", dev.id, feature.id, phi, max_incidence_deg));
        return Ok(e);
    }

    let mut scalings = frustum_scalings(scene, plan, dev, &frustum)?;
    let mut erode = false;
    if plan.uses(ConstraintTag::C3) {
        if frustum.vertices.len() == 8 {
            // the shrunk frustum keeps its side slopes, so the apertures are
            // those of the nominal frustum
            match c3_deltas(feature, &rel, frustum.effective_fov()) {
                Ok(s) => scalings.push(s),
                Err(CspaceError::UnsupportedOrientation(_)) => erode = true,
                Err(e) => return Err(e),
            }
        } else {
            erode = true;
        }
    }
    let label: Vec<String> = scalings.iter().map(|s| s.tag.to_string()).collect();
    if !scalings.is_empty() {
        space = match apply_scaling_sum(&space, &scalings) {
            Ok(s) => s,
            Err(CspaceError::CollapsedSpace(msg)) => {
                let mut e = space.with_manifold(Manifold::empty());
                e.diagnostics.push(format!("{}/{}: C1+{} collapsed: {msg}", dev.id, feature.id, label.join("+")));
                return Ok(e);
            }
            Err(e) => return Err(e),
        };
    }
    if erode {
        let fw = feature.world_frame(&scene.object_pose);
        space = c3_erosion(&space, feature, &fw)?;
    }
    Ok(space)
}

/// Build the fold operands for one reference orientation.
pub fn prepare(scene: &Scene, plan: &Plan, r1: &Mat3) -> Result<FoldInput> {
    let features = plan.feature_list(scene)?;
    if features.is_empty() {
        return Err(CspaceError::Config("no features to characterize".into()));
    }
    let devices = plan.device_list(scene)?;
    let mut terms = Vec::new();
    let mut offsets = Vec::new();
    let mut parents: Vec<(String, Vec3, Feature, ConstrainedSpace)> = Vec::new();
    let mut diagnostics = Vec::new();
    for id in &devices {
        let (sensor, dev) = scene.device(id)?;
        let t1 = scene.device_transform(&plan.reference_device, id)?;
        let r_dev = r1 * t1.rotation;
        let shift = -(r1 * t1.translation);
        offsets.push((id.clone(), t1));
        for (fi, f) in features.iter().enumerate() {
            let s = feature_space(scene, plan, dev, sensor.max_incidence_deg, f, &r_dev)?;
            diagnostics.extend(s.diagnostics.iter().cloned());
            let tag = if id != &plan.reference_device {
                ConstraintTag::C7
            } else if fi > 0 {
                ConstraintTag::C9
            } else {
                ConstraintTag::C1
            };
            terms.push(FoldTerm { tag, label: format!("{id}/{}", f.id), manifold: s.manifold.translated(&shift) });
            parents.push((id.clone(), shift, (*f).clone(), s));
        }
    }
    if plan.uses(ConstraintTag::C8) {
        if let Some(w) = &scene.workspace {
            let (_, dev) = scene.device(&plan.reference_device)?;
            let probe = ConstrainedSpace {
                manifold: Manifold::empty(),
                reference: Reference::lens(dev),
                provenance: vec![(ConstraintTag::C8, String::new())],
                orientations: vec![*r1],
                basis: None,
                post_occlusion: false,
                diagnostics: Vec::new(),
            };
            terms.push(FoldTerm {
                tag: ConstraintTag::C8,
                label: "workspace".into(),
                manifold: workspace_in_reference(&probe, w, &dev.mount)?,
            });
        }
    }
    let mut occlusions = Vec::new();
    if plan.uses(ConstraintTag::C6) && !scene.occluders.is_empty() {
        let results: Vec<Result<(String, OcclusionSpace)>> = parents
            .par_iter()
            .map(|(id, shift, f, s)| {
                let fw = f.world_frame(&scene.object_pose);
                let o = occlusion_space(f, &fw, s, &scene.occluders, plan.ray_step_deg, plan.hull_scale)?;
                Ok((format!("{id}/{}", f.id), o.translated(shift)))
            })
            .collect();
        for r in results {
            occlusions.push(r?);
        }
    }
    Ok(FoldInput { rotation: *r1, terms, occlusions, offsets, diagnostics })
}

#[derive(Debug, Clone)]
pub struct IntegrationResult {
    /// One space per device, reference device first.
    pub spaces: Vec<ConstrainedSpace>,
    pub stages: Vec<StageStat>,
    pub emptied_by: Option<(ConstraintTag, String)>,
    pub occlusion: Vec<(String, OcclusionSpace)>,
    pub diagnostics: Vec<String>,
    pub millis: f64,
}

impl IntegrationResult {
    pub fn reference(&self) -> &ConstrainedSpace {
        &self.spaces[0]
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.iter().any(|s| s.is_empty())
    }
}

fn provenance(plan: &Plan, input: &FoldInput, scene: &Scene) -> Vec<(ConstraintTag, String)> {
    let mut p = vec![(ConstraintTag::C1, format!("r=({}, {}, {}) deg", plan.orientation.alpha, plan.orientation.beta, plan.orientation.gamma))];
    for tag in [ConstraintTag::C5, ConstraintTag::C4, ConstraintTag::C3] {
        if plan.uses(tag) {
            p.push((tag, String::new()));
        }
    }
    let n_feat = input.terms.iter().filter(|t| t.tag != ConstraintTag::C8).count() / input.offsets.len().max(1);
    if n_feat > 1 {
        p.push((ConstraintTag::C9, format!("{n_feat} features")));
    }
    if input.offsets.len() > 1 {
        p.push((ConstraintTag::C7, format!("{} devices", input.offsets.len())));
    }
    if input.terms.iter().any(|t| t.tag == ConstraintTag::C8) {
        p.push((ConstraintTag::C8, "workspace".into()));
    }
    if plan.uses(ConstraintTag::C6) && !scene.occluders.is_empty() {
        p.push((ConstraintTag::C6, format!("{} occluders", scene.occluders.len())));
    }
    p
}

/// Per-device spaces for one fixed reference rotation.
fn integrate_fixed(scene: &Scene, plan: &Plan, r1: &Mat3) -> Result<(Vec<ConstrainedSpace>, FoldInput, FoldOutput)> {
    let input = prepare(scene, plan, r1)?;
    let order: Vec<usize> = (0..input.terms.len()).collect();
    let out = fold(&input, &order)?;
    let prov = provenance(plan, &input, scene);
    let post_occlusion = !input.occlusions.iter().all(|(_, o)| o.is_empty());
    let mut spaces = Vec::new();
    for (id, t1) in &input.offsets {
        let (_, dev) = scene.device(id)?;
        let r_dev = r1 * t1.rotation;
        let mut m = out.manifold.translated(&(r1 * t1.translation));
        let reference = Reference::new(dev, plan.reference_frame);
        if plan.reference_frame == ReferenceFrame::Tcp {
            // lens = tcp + R_tcp t_mount
            let r_tcp = r_dev * dev.mount.rotation.transpose();
            m = m.translated(&-(r_tcp * dev.mount.translation));
        }
        let orientation = match plan.reference_frame {
            ReferenceFrame::Lens => r_dev,
            ReferenceFrame::Tcp => r_dev * dev.mount.rotation.transpose(),
        };
        spaces.push(ConstrainedSpace {
            manifold: m,
            reference,
            provenance: prov.clone(),
            orientations: vec![orientation],
            basis: None,
            post_occlusion,
            diagnostics: input.diagnostics.clone(),
        });
    }
    Ok((spaces, input, out))
}

pub fn integrate(scene: &Scene, plan: &Plan) -> Result<IntegrationResult> {
    let start = Instant::now();
    let base = orientation_base(scene);
    let combos = match &plan.range {
        Some(r) if plan.uses(ConstraintTag::C2) => r.combinations(),
        _ => vec![plan.orientation],
    };
    let mut spaces: Option<Vec<ConstrainedSpace>> = None;
    let mut stages = Vec::new();
    let mut emptied_by = None;
    let mut occlusion = Vec::new();
    let mut diagnostics = Vec::new();
    for e in &combos {
        let r1 = base * e.matrix();
        let (s, input, out) = integrate_fixed(scene, plan, &r1)?;
        stages.extend(out.stages);
        diagnostics.extend(input.diagnostics);
        if emptied_by.is_none() {
            emptied_by = out.emptied_by;
        }
        if combos.len() == 1 {
            occlusion = input.occlusions;
        }
        spaces = Some(match spaces {
            None => s,
            Some(acc) => {
                let mut next = Vec::with_capacity(acc.len());
                for (mut a, b) in acc.into_iter().zip(s) {
                    a.manifold = if a.is_empty() { Manifold::empty() } else { intersection(&a.manifold, &b.manifold)? };
                    a.orientations.extend(b.orientations);
                    next.push(a);
                }
                if emptied_by.is_none() && next[0].is_empty() {
                    emptied_by = Some((ConstraintTag::C2, format!("orientation {e:?}")));
                }
                next
            }
        });
    }
    let mut spaces = spaces.expect("at least one orientation");
    if combos.len() > 1 {
        for s in &mut spaces {
            s.push_tag(ConstraintTag::C2, format!("{} orientations", combos.len()));
        }
    }
    Ok(IntegrationResult { spaces, stages, emptied_by, occlusion, diagnostics, millis: start.elapsed().as_secs_f64() * 1e3 })
}

/// Manifold-independent checks matching a plan at one reference rotation;
/// positions are reference-device lens positions.
pub fn check_spec(scene: &Scene, plan: &Plan, r1: &Mat3) -> Result<CheckSpec> {
    let features: Vec<Feature> = plan.feature_list(scene)?.into_iter().cloned().collect();
    let (_, ref_dev) = scene.device(&plan.reference_device)?;
    let mut devices = Vec::new();
    for id in plan.device_list(scene)? {
        let (sensor, dev) = scene.device(&id)?;
        let offset = scene.device_transform(&plan.reference_device, &id)?;
        let frustum = dev.params.frustum()?;
        let scalings = frustum_scalings(scene, plan, dev, &frustum)?;
        let mut verts = frustum.vertices.clone();
        for (k, v) in verts.iter_mut().enumerate() {
            for s in &scalings {
                *v += inward(&frustum.roles[k], &s.deltas[k]);
            }
        }
        devices.push(DeviceCheck {
            id: id.clone(),
            offset,
            frustum: Manifold::new(verts, frustum.faces.clone()),
            max_incidence_deg: sensor.max_incidence_deg,
        });
    }
    Ok(CheckSpec {
        reference: Reference::lens(ref_dev),
        rotations: vec![*r1],
        devices,
        features,
        full_feature: plan.uses(ConstraintTag::C3),
        incidence: true,
        line_of_sight: plan.uses(ConstraintTag::C6) && !scene.occluders.is_empty(),
        workspace: plan.uses(ConstraintTag::C8) && scene.workspace.is_some(),
        reference_mount: ref_dev.mount,
    })
}

/// Checks for positions of `device`'s space in the plan's frame, over every
/// orientation the plan integrates (one, or the whole sampled range).
pub fn device_check_spec(scene: &Scene, plan: &Plan, device: &str) -> Result<CheckSpec> {
    let base = orientation_base(scene);
    let combos = match &plan.range {
        Some(r) if plan.uses(ConstraintTag::C2) => r.combinations(),
        _ => vec![plan.orientation],
    };
    let rotations: Vec<Mat3> = combos.iter().map(|e| base * e.matrix()).collect();
    let mut spec = check_spec(scene, plan, &rotations[0])?;
    let (_, dev) = scene.device(device)?;
    let t1 = scene.device_transform(&plan.reference_device, device)?;
    // reference lens = position pose * mount
    let (mount, frame_rot) = match plan.reference_frame {
        ReferenceFrame::Lens => (t1.inverse(), t1.rotation),
        ReferenceFrame::Tcp => (dev.mount.compose(&t1.inverse()), t1.rotation * dev.mount.rotation.transpose()),
    };
    spec.reference = Reference { device: device.to_string(), frame: plan.reference_frame, mount };
    spec.rotations = rotations.iter().map(|r| r * frame_rot).collect();
    Ok(spec)
}
