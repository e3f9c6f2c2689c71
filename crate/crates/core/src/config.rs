//! JSON scene and run configuration. All lengths in mm, angles in degrees;
//! the unit is part of every field name. Unknown fields are rejected.

use crate::cspace::{ConstraintTag, OrientationRange, ReferenceFrame};
use crate::domain::{
    DeviceLink, DeviceRole, ErrorBudget, Feature, FeatureKind, ImagingDevice, ImagingParams, PlaneSize, RangeSensor,
    RigidBody, RobotWorkspace, Scene,
};
use crate::error::{CspaceError, Result};
use crate::integrate::Plan;
use crate::occlusion::DEFAULT_HULL_SCALE;
use cspace_geom::io::read_mesh;
use cspace_geom::shapes::{cuboid, icosahedron, octahedron};
use cspace_geom::{EulerZyx, Manifold, Pose6D, Vec3};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseConfig {
    #[serde(default)]
    pub translation_mm: [f64; 3],
    #[serde(default)]
    pub rotation: EulerZyx,
}

impl PoseConfig {
    pub fn pose(&self) -> Pose6D {
        Pose6D::new(Vec3::from(self.translation_mm), self.rotation)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiddlePlaneConfig {
    pub depth_mm: f64,
    pub size_mm: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub id: String,
    #[serde(default)]
    pub role: RoleConfig,
    pub near_mm: f64,
    pub far_mm: f64,
    pub fov_x_deg: f64,
    pub fov_y_deg: f64,
    /// Width and height of the near plane.
    #[serde(default)]
    pub near_plane_mm: Option<[f64; 2]>,
    #[serde(default)]
    pub far_plane_mm: Option<[f64; 2]>,
    #[serde(default)]
    pub middle_plane: Option<MiddlePlaneConfig>,
    /// Lens pose relative to the sensor TCP.
    #[serde(default)]
    pub mount: PoseConfig,
    /// Working distance where the accuracy spec holds, lens z.
    #[serde(default)]
    pub accuracy_z_mm: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleConfig {
    #[default]
    Camera,
    Projector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub id: String,
    #[serde(default)]
    pub flange_mount: PoseConfig,
    pub max_incidence_deg: f64,
    pub devices: Vec<DeviceConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub from: String,
    pub to: String,
    #[serde(flatten)]
    pub pose: PoseConfig,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum KindConfig {
    #[default]
    Flat,
    Concave,
    Convex,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub id: String,
    /// Pose in the object frame.
    #[serde(default)]
    pub pose: PoseConfig,
    pub l_f_mm: f64,
    #[serde(default)]
    pub h_f_mm: f64,
    #[serde(default)]
    pub kind: KindConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    /// OBJ or STL, relative to the config file.
    Mesh { path: PathBuf },
    Box { min_mm: [f64; 3], max_mm: [f64; 3] },
    Icosahedron { edge_mm: f64 },
    Octahedron { edge_mm: f64 },
}

impl ShapeConfig {
    fn build(&self, base: &Path) -> Result<Manifold> {
        let m = match self {
            ShapeConfig::Mesh { path } => read_mesh(&base.join(path))?,
            ShapeConfig::Box { min_mm, max_mm } => cuboid(&Vec3::from(*min_mm), &Vec3::from(*max_mm)),
            ShapeConfig::Icosahedron { edge_mm } => icosahedron(&Vec3::zeros(), *edge_mm),
            ShapeConfig::Octahedron { edge_mm } => octahedron(&Vec3::zeros(), *edge_mm),
        };
        if m.is_empty() || !m.is_watertight() {
            return Err(CspaceError::Config("body mesh must be closed and non-empty".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    pub id: String,
    pub shape: ShapeConfig,
    #[serde(default)]
    pub pose: PoseConfig,
    /// Pose given in the object frame instead of the world frame.
    #[serde(default)]
    pub in_object_frame: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkspaceConfig {
    /// Hollow half-sphere of TCP positions above the robot base.
    HalfSphere {
        inner_radius_mm: f64,
        outer_radius_mm: f64,
        #[serde(default = "default_azimuth")]
        n_azimuth: usize,
        #[serde(default = "default_elevation")]
        n_elevation: usize,
    },
    /// Closed mesh of TCP positions, world frame.
    Mesh { path: PathBuf },
}

fn default_azimuth() -> usize {
    96
}

fn default_elevation() -> usize {
    24
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    #[serde(default)]
    pub pose: PoseConfig,
    #[serde(default)]
    pub shape: Option<ShapeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    #[serde(default)]
    pub min_deg: f64,
    #[serde(default)]
    pub max_deg: f64,
    /// Explicit samples; overrides min/max stepping.
    #[serde(default)]
    pub values_deg: Option<Vec<f64>>,
}

impl AxisRange {
    fn samples(&self, step: f64) -> Vec<f64> {
        match &self.values_deg {
            Some(v) => v.clone(),
            None => OrientationRange::stepped(self.min_deg, self.max_deg, step),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub alpha_z: AxisRange,
    pub beta_y: AxisRange,
    pub gamma_x: AxisRange,
    /// Sampling step of the orientation range.
    pub step_deg: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FrameConfig {
    #[default]
    Lens,
    Tcp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub reference_device: String,
    #[serde(default)]
    pub reference_frame: FrameConfig,
    /// Reference lens orientation relative to the object viewing frame.
    #[serde(default)]
    pub orientation: EulerZyx,
    #[serde(default)]
    pub range: Option<RangeConfig>,
    /// Constraint tags; default all.
    #[serde(default)]
    pub constraints: Option<Vec<String>>,
    #[serde(default)]
    pub features: Vec<String>,
    #[serde(default)]
    pub devices: Vec<String>,
    #[serde(default = "default_ray_step")]
    pub ray_step_deg: f64,
    #[serde(default = "default_hull_scale")]
    pub hull_scale: f64,
    #[serde(default = "default_resolution")]
    pub render_resolution_px: [usize; 2],
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_ray_step() -> f64 {
    0.5
}

fn default_hull_scale() -> f64 {
    DEFAULT_HULL_SCALE
}

fn default_resolution() -> [usize; 2] {
    [320, 240]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default)]
    pub object: ObjectConfig,
    pub features: Vec<FeatureConfig>,
    pub sensors: Vec<SensorConfig>,
    #[serde(default)]
    pub device_links: Vec<LinkConfig>,
    #[serde(default)]
    pub occluders: Vec<BodyConfig>,
    #[serde(default)]
    pub workspace: Option<WorkspaceConfig>,
    /// `T_w->r`.
    #[serde(default)]
    pub robot_base: PoseConfig,
    #[serde(default)]
    pub error_budget: ErrorBudgetConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorBudgetConfig {
    #[serde(default)]
    pub alignment_mm: [f64; 3],
    #[serde(default)]
    pub sensor_model_mm: [f64; 3],
    #[serde(default)]
    pub robot_mm: [f64; 3],
}

/// A parsed configuration: scene, plan and the run settings the CLI uses.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scene: Scene,
    pub plan: Plan,
    pub resolution: (usize, usize),
    pub output_dir: Option<PathBuf>,
    pub config: SceneConfig,
}

impl SceneConfig {
    pub fn parse(text: &str) -> Result<SceneConfig> {
        serde_json::from_str(text).map_err(|e| CspaceError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Loaded> {
        let text = std::fs::read_to_string(path).map_err(|e| CspaceError::Config(format!("{}: {e}", path.display())))?;
        let cfg = SceneConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.build(base)
    }

    pub fn build(self, base: &Path) -> Result<Loaded> {
        let object_pose = self.object.pose.pose();
        let object_mesh = self.object.shape.as_ref().map(|s| s.build(base)).transpose()?;
        let mut features = Vec::new();
        for f in &self.features {
            let kind = match f.kind {
                KindConfig::Flat => FeatureKind::Flat,
                KindConfig::Concave => FeatureKind::Concave,
                KindConfig::Convex => FeatureKind::Convex,
            };
            let feat = Feature { id: f.id.clone(), frame: f.pose.pose(), side_length_mm: f.l_f_mm, height_mm: f.h_f_mm, kind };
            feat.validate()?;
            if features.iter().any(|o: &Feature| o.id == feat.id) {
                return Err(CspaceError::Config(format!("duplicate feature id {}", feat.id)));
            }
            features.push(feat);
        }
        let mut sensors = Vec::new();
        for s in &self.sensors {
            let devices = s
                .devices
                .iter()
                .map(|d| {
                    let mut params = ImagingParams::from_fov(d.near_mm, d.far_mm, d.fov_x_deg, d.fov_y_deg);
                    params.near_plane = d.near_plane_mm.map(|p| PlaneSize { width_mm: p[0], height_mm: p[1] });
                    params.far_plane = d.far_plane_mm.map(|p| PlaneSize { width_mm: p[0], height_mm: p[1] });
                    params.middle = d
                        .middle_plane
                        .as_ref()
                        .map(|m| (m.depth_mm, PlaneSize { width_mm: m.size_mm[0], height_mm: m.size_mm[1] }));
                    ImagingDevice {
                        id: d.id.clone(),
                        role: match d.role {
                            RoleConfig::Camera => DeviceRole::Camera,
                            RoleConfig::Projector => DeviceRole::Projector,
                        },
                        params,
                        mount: d.mount.pose(),
                        accuracy_z_mm: d.accuracy_z_mm.map(|a| (a[0], a[1])),
                    }
                })
                .collect();
            let sensor = RangeSensor {
                id: s.id.clone(),
                devices,
                flange_mount: s.flange_mount.pose(),
                max_incidence_deg: s.max_incidence_deg,
            };
            sensor.validate()?;
            sensors.push(sensor);
        }
        let mut ids: Vec<&str> = sensors.iter().flat_map(|s| s.devices.iter().map(|d| d.id.as_str())).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(CspaceError::Config("device ids must be unique across sensors".into()));
        }
        let device_links = self
            .device_links
            .iter()
            .map(|l| DeviceLink { from: l.from.clone(), to: l.to.clone(), pose: l.pose.pose() })
            .collect();
        let mut occluders = Vec::new();
        for b in &self.occluders {
            let local = b.pose.pose();
            let pose = if b.in_object_frame { object_pose.compose(&local) } else { local };
            occluders.push(RigidBody { id: b.id.clone(), mesh: b.shape.build(base)?, pose });
        }
        let robot_base = self.robot_base.pose();
        let workspace = match &self.workspace {
            None => None,
            Some(WorkspaceConfig::HalfSphere { inner_radius_mm, outer_radius_mm, n_azimuth, n_elevation }) => {
                if robot_base.rotation != cspace_geom::Mat3::identity() {
                    return Err(CspaceError::Config("half-sphere workspace needs an unrotated robot base".into()));
                }
                Some(RobotWorkspace::half_shell(
                    robot_base.translation,
                    *inner_radius_mm,
                    *outer_radius_mm,
                    *n_azimuth,
                    *n_elevation,
                )?)
            }
            Some(WorkspaceConfig::Mesh { path }) => Some(RobotWorkspace::from_mesh(read_mesh(&base.join(path))?)?),
        };
        let e = &self.error_budget;
        let budget = [e.alignment_mm, e.sensor_model_mm, e.robot_mm];
        if budget.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(CspaceError::Config("error budget entries must be finite and >= 0".into()));
        }
        let scene = Scene {
            object_pose,
            object_mesh,
            features,
            sensors,
            device_links,
            occluders,
            workspace,
            robot_base,
            error_budget: ErrorBudget { alignment_mm: e.alignment_mm, sensor_model_mm: e.sensor_model_mm, robot_mm: e.robot_mm },
        };

        let r = &self.run;
        if !r.orientation.is_finite() {
            return Err(CspaceError::Config("orientation must be finite".into()));
        }
        let mut plan = Plan::new(&r.reference_device, r.orientation);
        plan.reference_frame = match r.reference_frame {
            FrameConfig::Lens => ReferenceFrame::Lens,
            FrameConfig::Tcp => ReferenceFrame::Tcp,
        };
        if let Some(tags) = &r.constraints {
            let parsed: Option<Vec<ConstraintTag>> = tags.iter().map(|t| ConstraintTag::parse(t)).collect();
            let parsed = parsed.ok_or_else(|| CspaceError::Config(format!("unknown constraint tag in {tags:?}")))?;
            plan = plan.with_constraints(&parsed);
        }
        plan.features = r.features.clone();
        plan.devices = r.devices.clone();
        plan.ray_step_deg = r.ray_step_deg;
        plan.hull_scale = r.hull_scale;
        if !(plan.ray_step_deg > 0.0 && plan.hull_scale >= 1.0) {
            return Err(CspaceError::Config("need ray_step_deg > 0 and hull_scale >= 1".into()));
        }
        if let Some(rc) = &r.range {
            plan.range = Some(range_from(rc, rc.step_deg)?);
        }
        scene.device(&plan.reference_device).map_err(|e| CspaceError::Config(e.to_string()))?;
        for id in plan.features.iter() {
            scene.feature(id).map_err(|e| CspaceError::Config(e.to_string()))?;
        }
        for id in plan.devices.iter() {
            scene.device(id).map_err(|e| CspaceError::Config(e.to_string()))?;
        }
        let [w, h] = r.render_resolution_px;
        if w < 16 || h < 16 {
            return Err(CspaceError::Config("render resolution must be at least 16x16".into()));
        }
        let output_dir = r.output_dir.as_ref().map(|d| base.join(d));
        Ok(Loaded { scene, plan, resolution: (w, h), output_dir, config: self })
    }
}

fn range_from(rc: &RangeConfig, step: f64) -> Result<OrientationRange> {
    if !(step > 0.0) {
        return Err(CspaceError::Config("range step_deg must be positive".into()));
    }
    OrientationRange::new(rc.alpha_z.samples(step), rc.beta_y.samples(step), rc.gamma_x.samples(step))
}

impl Loaded {
    /// Re-sample the orientation range with another step.
    pub fn set_range_step(&mut self, step: f64) -> Result<()> {
        if let Some(rc) = &self.config.run.range {
            self.plan.range = Some(range_from(rc, step)?);
        }
        Ok(())
    }
}
