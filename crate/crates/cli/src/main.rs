//! `cspace`: characterize, validate, render and measure sensor C-spaces.
//!
//! Exit codes: 0 ok, 1 I/O or internal failure, 2 bad config or pose,
//! 3 empty final space, 4 a validated vertex failed.

use clap::{Args, Parser, Subcommand};
use cspace_core::config::{Loaded, SceneConfig};
use cspace_core::integrate::{device_check_spec, integrate, IntegrationResult};
use cspace_core::verify::{mc_volume, render_depth, sample_interior, write_xyz, ValidationReport, Validator};
use cspace_core::{CspaceError, ReferenceFrame};
use cspace_geom::io::{read_mesh, write_mesh};
use cspace_geom::pose::matrix_to_euler;
use cspace_geom::{EulerZyx, Manifold, Pose6D, Vec3};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "cspace", version, about = "Constrained viewpoint spaces for range sensors")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the configured constraints and write one manifold per device.
    Characterize(CharacterizeArgs),
    /// Check the vertices and random interior points of a manifold.
    Validate(ValidateArgs),
    /// Ray-cast a depth image and point cloud from one device pose.
    Render(RenderArgs),
    /// Volume and mesh statistics of manifold files.
    Volume(VolumeArgs),
}

#[derive(Args)]
struct CharacterizeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's output_dir, else ./out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the orientation range sampling step.
    #[arg(long)]
    step_deg: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Manifold (OBJ or STL) in the plan frame of `--device`.
    #[arg(long)]
    manifold: PathBuf,
    /// Device whose space the manifold is; default the reference device.
    #[arg(long)]
    device: Option<String>,
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    step_deg: Option<f64>,
    /// Report path; default `<manifold stem>.validation.json` next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    config: PathBuf,
    /// `x,y,z,alpha,beta,gamma` world lens pose (mm, deg, Z-Y-X), or `x,y,z`
    /// for a position of the device's space at the plan orientation.
    #[arg(long, allow_hyphen_values = true)]
    pose: String,
    #[arg(long)]
    device: Option<String>,
    /// `WIDTHxHEIGHT`; default from the config.
    #[arg(long)]
    resolution: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VolumeArgs {
    #[arg(required = true)]
    manifolds: Vec<PathBuf>,
    /// Also estimate each volume from this many random samples.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Io(String),
    Config(String),
    Empty(String),
    VertexFailed(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Empty(_) => 3,
            Failure::VertexFailed(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Config(m) | Failure::Empty(m) | Failure::VertexFailed(m) => m,
        }
    }
}

impl From<CspaceError> for Failure {
    fn from(e: CspaceError) -> Self {
        match e {
            CspaceError::Config(_) | CspaceError::InvalidParams(_) | CspaceError::InvalidFeature(_) | CspaceError::UnresolvedFrame(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Io(e.to_string()),
        }
    }
}

impl From<cspace_geom::GeomError> for Failure {
    fn from(e: cspace_geom::GeomError) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    cspace_core::init_threads();
    let res = match cli.cmd {
        Cmd::Characterize(a) => characterize(a),
        Cmd::Validate(a) => validate(a),
        Cmd::Render(a) => render(a),
        Cmd::Volume(a) => volume(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load(config: &Path, step: Option<f64>) -> Result<Loaded, Failure> {
    let mut loaded = SceneConfig::load(config)?;
    if let Some(s) = step {
        loaded.set_range_step(s)?;
    }
    Ok(loaded)
}

fn out_dir(flag: Option<PathBuf>, loaded: &Loaded) -> Result<PathBuf, Failure> {
    let dir = flag.or_else(|| loaded.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Outcome {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn file_safe(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn euler_deg(m: &cspace_geom::Mat3) -> [f64; 3] {
    let e = matrix_to_euler(m);
    [e.alpha, e.beta, e.gamma]
}

#[derive(Serialize)]
struct StageReport {
    constraint: String,
    label: String,
    volume_mm3: f64,
    vertices: usize,
    faces: usize,
    millis: f64,
}

#[derive(Serialize)]
struct SpaceReport {
    device: String,
    frame: String,
    file: String,
    volume_mm3: f64,
    vertices: usize,
    faces: usize,
    constraints: Vec<String>,
}

#[derive(Serialize)]
struct OcclusionReport {
    label: String,
    file: String,
    bodies: Vec<String>,
    collision_points: usize,
    volume_mm3: f64,
}

#[derive(Serialize)]
struct RunReport {
    config: String,
    reference_device: String,
    orientations: usize,
    spaces: Vec<SpaceReport>,
    occlusion: Vec<OcclusionReport>,
    stages: Vec<StageReport>,
    emptied_by: Option<String>,
    diagnostics: Vec<String>,
    millis_integrate: f64,
    millis_total: f64,
}

fn volume_of(m: &Manifold) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.signed_volume().max(0.0)
    }
}

/// Sidecar describing the frame a manifold file lives in.
fn meta_text(res: &IntegrationResult, i: usize) -> String {
    let s = &res.spaces[i];
    let mut t = String::new();
    let _ = writeln!(t, "device {}", s.reference.device);
    let _ = writeln!(t, "frame {}", s.reference.frame);
    let _ = writeln!(t, "volume_mm3 {}", volume_of(&s.manifold));
    let _ = writeln!(t, "vertices {}", s.manifold.vertices.len());
    let _ = writeln!(t, "faces {}", s.manifold.faces.len());
    for (tag, note) in &s.provenance {
        let _ = writeln!(t, "constraint {tag} {note}");
    }
    for r in &s.orientations {
        let [a, b, g] = euler_deg(r);
        let _ = writeln!(t, "orientation_zyx_deg {a} {b} {g}");
    }
    for d in &s.diagnostics {
        let _ = writeln!(t, "diagnostic {d}");
    }
    t
}

fn characterize(a: CharacterizeArgs) -> Outcome {
    let start = Instant::now();
    let loaded = load(&a.config, a.step_deg)?;
    let dir = out_dir(a.out, &loaded)?;
    let res = integrate(&loaded.scene, &loaded.plan)?;
    let mut spaces = Vec::new();
    for (i, s) in res.spaces.iter().enumerate() {
        let name = format!("cspace_{}", file_safe(&s.reference.device));
        write_mesh(&dir.join(format!("{name}.obj")), &s.manifold)?;
        std::fs::write(dir.join(format!("{name}.meta.txt")), meta_text(&res, i))?;
        spaces.push(SpaceReport {
            device: s.reference.device.clone(),
            frame: s.reference.frame.to_string(),
            file: format!("{name}.obj"),
            volume_mm3: volume_of(&s.manifold),
            vertices: s.manifold.vertices.len(),
            faces: s.manifold.faces.len(),
            constraints: s.tags().iter().map(|t| t.to_string()).collect(),
        });
    }
    let mut occlusion = Vec::new();
    for (label, o) in &res.occlusion {
        let name = format!("occlusion_{}", file_safe(label));
        write_mesh(&dir.join(format!("{name}.obj")), &o.manifold)?;
        write_xyz(&dir.join(format!("{name}_hits.xyz")), &o.collision_points)?;
        occlusion.push(OcclusionReport {
            label: label.clone(),
            file: format!("{name}.obj"),
            bodies: o.bodies.clone(),
            collision_points: o.collision_points.len(),
            volume_mm3: volume_of(&o.manifold),
        });
    }
    let emptied_by = res.emptied_by.as_ref().map(|(t, l)| format!("{t} {l}"));
    let report = RunReport {
        config: a.config.display().to_string(),
        reference_device: loaded.plan.reference_device.clone(),
        orientations: res.reference().orientations.len(),
        spaces,
        occlusion,
        stages: res
            .stages
            .iter()
            .map(|s| StageReport {
                constraint: s.tag.to_string(),
                label: s.label.clone(),
                volume_mm3: s.volume,
                vertices: s.vertices,
                faces: s.faces,
                millis: s.millis,
            })
            .collect(),
        emptied_by: emptied_by.clone(),
        diagnostics: res.diagnostics.clone(),
        millis_integrate: res.millis,
        millis_total: start.elapsed().as_secs_f64() * 1e3,
    };
    write_json(&dir.join("report.json"), &report)?;
    for s in &report.spaces {
        println!("{:<12} {:>14.1} mm^3  {:>6} vertices  {}", s.device, s.volume_mm3, s.vertices, s.file);
    }
    for d in &res.diagnostics {
        println!("note: {d}");
    }
    println!("integration {:.1} ms, total {:.1} ms, output {}", res.millis, report.millis_total, dir.display());
    if res.is_empty() {
        let culprit = emptied_by.unwrap_or_else(|| "unknown constraint".into());
        return Err(Failure::Empty(format!("final space is empty, emptied by {culprit}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct PointResult {
    index: usize,
    position: [f64; 3],
    passed: bool,
    min_frustum_margin_mm: Option<f64>,
}

#[derive(Serialize)]
struct ValidateReport {
    manifold: String,
    device: String,
    frame: String,
    status: &'static str,
    orientations: usize,
    vertices_total: usize,
    vertices_passed: usize,
    samples_requested: usize,
    samples_drawn: usize,
    samples_passed: usize,
    seed: u64,
    vertices: Vec<PointResult>,
    samples: Vec<PointResult>,
    /// Full check lists of every failing point.
    failures: Vec<ValidationReport>,
}

fn point_result(index: usize, r: &ValidationReport) -> PointResult {
    PointResult {
        index,
        position: r.position,
        passed: r.passed,
        min_frustum_margin_mm: r.min_margin(cspace_core::verify::CheckKind::Frustum),
    }
}

fn validate(a: ValidateArgs) -> Outcome {
    let loaded = load(&a.config, a.step_deg)?;
    let device = a.device.clone().unwrap_or_else(|| loaded.plan.reference_device.clone());
    let m = read_mesh(&a.manifold).map_err(|e| Failure::Config(format!("{}: {e}", a.manifold.display())))?;
    let out = a.out.clone().unwrap_or_else(|| {
        let stem = a.manifold.file_stem().and_then(|s| s.to_str()).unwrap_or("manifold");
        a.manifold.with_file_name(format!("{stem}.validation.json"))
    });
    let frame = match loaded.plan.reference_frame {
        ReferenceFrame::Lens => "lens",
        ReferenceFrame::Tcp => "tcp",
    };
    let mut report = ValidateReport {
        manifold: a.manifold.display().to_string(),
        device: device.clone(),
        frame: frame.into(),
        status: "empty",
        orientations: 0,
        vertices_total: m.vertices.len(),
        vertices_passed: 0,
        samples_requested: a.samples,
        samples_drawn: 0,
        samples_passed: 0,
        seed: a.seed,
        vertices: Vec::new(),
        samples: Vec::new(),
        failures: Vec::new(),
    };
    if m.is_empty() {
        write_json(&out, &report)?;
        println!("empty");
        return Ok(());
    }
    if !m.is_watertight() {
        return Err(Failure::Config(format!("{} is not a closed mesh", a.manifold.display())));
    }
    let spec = device_check_spec(&loaded.scene, &loaded.plan, &device)?;
    report.orientations = spec.rotations.len();
    let v = Validator::new(&loaded.scene, &spec);
    let vert_reports: Vec<ValidationReport> = m.vertices.par_iter().map(|p| v.validate(p)).collect();
    let samples = sample_interior(&m, a.samples, a.seed);
    let sample_reports: Vec<ValidationReport> = samples.par_iter().map(|p| v.validate(p)).collect();
    report.vertices = vert_reports.iter().enumerate().map(|(i, r)| point_result(i, r)).collect();
    report.samples = sample_reports.iter().enumerate().map(|(i, r)| point_result(i, r)).collect();
    report.vertices_passed = vert_reports.iter().filter(|r| r.passed).count();
    report.samples_drawn = samples.len();
    report.samples_passed = sample_reports.iter().filter(|r| r.passed).count();
    report.failures = vert_reports.iter().chain(&sample_reports).filter(|r| !r.passed).cloned().collect();
    let vertices_ok = report.vertices_passed == report.vertices_total;
    report.status = if vertices_ok { "pass" } else { "fail" };
    write_json(&out, &report)?;
    println!(
        "{}: {}/{} vertices pass, {}/{} samples pass, report {}",
        report.status,
        report.vertices_passed,
        report.vertices_total,
        report.samples_passed,
        report.samples_drawn,
        out.display()
    );
    if !vertices_ok {
        return Err(Failure::VertexFailed(format!(
            "{} of {} vertices fail",
            report.vertices_total - report.vertices_passed,
            report.vertices_total
        )));
    }
    Ok(())
}

fn parse_numbers(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().ok().filter(|x| x.is_finite())).collect()
}

fn parse_resolution(s: &str) -> Option<(usize, usize)> {
    let (w, h) = s.split_once(['x', 'X'])?;
    Some((w.trim().parse().ok()?, h.trim().parse().ok()?))
}

fn render(a: RenderArgs) -> Outcome {
    let loaded = load(&a.config, None)?;
    let device = a.device.clone().unwrap_or_else(|| loaded.plan.reference_device.clone());
    let (_, dev) = loaded.scene.device(&device)?;
    let nums = parse_numbers(&a.pose).ok_or_else(|| Failure::Config(format!("bad pose {:?}", a.pose)))?;
    let lens = match nums.as_slice() {
        [x, y, z, al, be, ga] => Pose6D::new(Vec3::new(*x, *y, *z), EulerZyx::new(*al, *be, *ga)),
        [x, y, z] => {
            let spec = device_check_spec(&loaded.scene, &loaded.plan, &device)?;
            let p = Pose6D::from_parts(Vec3::new(*x, *y, *z), spec.rotations[0]);
            match loaded.plan.reference_frame {
                ReferenceFrame::Lens => p,
                ReferenceFrame::Tcp => p.compose(&dev.mount),
            }
        }
        _ => return Err(Failure::Config(format!("pose needs 3 or 6 values, got {}", nums.len()))),
    };
    let resolution = match &a.resolution {
        Some(s) => parse_resolution(s).ok_or_else(|| Failure::Config(format!("bad resolution {s:?}")))?,
        None => loaded.resolution,
    };
    if resolution.0 < 16 || resolution.1 < 16 {
        return Err(Failure::Config("resolution must be at least 16x16".into()));
    }
    let dir = out_dir(a.out, &loaded)?;
    let img = render_depth(&loaded.scene, &device, &lens, resolution)?;
    let name = file_safe(&device);
    img.write_pgm(&dir.join(format!("depth_{name}.pgm")))?;
    write_xyz(&dir.join(format!("points_{name}.xyz")), &img.points())?;
    println!("{} nonzero pixels of {}x{}", img.nonzero(), img.width, img.height);
    for f in &loaded.scene.features {
        let fw = f.world_frame(&loaded.scene.object_pose);
        let pts = cspace_core::domain::feature_surface_points(f);
        let seen = pts.iter().filter(|p| img.sees(&fw.transform_point(p), 1.0)).count();
        println!("feature {}: {seen}/{} surface points visible", f.id, pts.len());
    }
    Ok(())
}

#[derive(Serialize)]
struct VolumeReport {
    file: String,
    watertight: bool,
    volume_mm3: f64,
    vertices: usize,
    faces: usize,
    bbox_min: Option<[f64; 3]>,
    bbox_max: Option<[f64; 3]>,
    mc_volume_mm3: Option<f64>,
}

fn volume(a: VolumeArgs) -> Outcome {
    let mut out = Vec::new();
    for path in &a.manifolds {
        let m = read_mesh(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let bbox = m.bbox();
        out.push(VolumeReport {
            file: path.display().to_string(),
            watertight: m.is_empty() || m.is_watertight(),
            volume_mm3: volume_of(&m),
            vertices: m.vertices.len(),
            faces: m.faces.len(),
            bbox_min: bbox.map(|(lo, _)| [lo.x, lo.y, lo.z]),
            bbox_max: bbox.map(|(_, hi)| [hi.x, hi.y, hi.z]),
            mc_volume_mm3: (a.samples > 0).then(|| mc_volume(&m, a.samples, a.seed)),
        });
    }
    let text = serde_json::to_string_pretty(&out).map_err(|e| Failure::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}
