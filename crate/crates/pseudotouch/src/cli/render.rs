use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use pseudotouch_core::geometry::{make_primitive, parse_obj, Bvh, PrimitiveSpec, TriangleMesh};
use pseudotouch_core::math::{Pose, Vec3};
use pseudotouch_core::patch::{normalize_or_far, render_patch, DepthPatch, NormalizedPatch, RenderConfig, PATCH_SIZE};
use pseudotouch_core::presets::{default8, dissimilar5};
use pseudotouch_core::recognition::contact_frame;
use serde::{Deserialize, Serialize};

use super::{load_config, parse_triple, prepare_output, set, CliError, OutputArgs};
use crate::pgm::{normalized_to_pgm, patch_to_pgm};

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Shape JSON (`{"kind":"sphere",...}`) or a preset object name.
    #[arg(long)]
    pub shape: Option<String>,
    /// OBJ mesh instead of a shape.
    #[arg(long, conflicts_with = "shape")]
    pub obj: Option<PathBuf>,
    /// Meters per OBJ unit.
    #[arg(long)]
    pub obj_scale: Option<f64>,
    /// Touch the surface point nearest to x,y,z (mm).
    #[arg(long)]
    pub at: Option<String>,
    /// Sensor origin x,y,z (mm); requires --normal.
    #[arg(long, conflicts_with = "at", requires = "normal")]
    pub position: Option<String>,
    /// Outward surface normal at the contact; the sensor looks along its negative.
    #[arg(long, requires = "position")]
    pub normal: Option<String>,
    #[arg(long)]
    pub max_range: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderRunConfig {
    pub shape: Option<PrimitiveSpec>,
    pub obj: Option<PathBuf>,
    pub obj_scale: f64,
    pub at_mm: Option<[f64; 3]>,
    pub position_mm: Option<[f64; 3]>,
    pub normal: Option<[f64; 3]>,
    pub render: RenderConfig,
}

impl Default for RenderRunConfig {
    fn default() -> Self {
        RenderRunConfig {
            shape: None,
            obj: None,
            obj_scale: 1.0,
            at_mm: None,
            position_mm: None,
            normal: None,
            render: RenderConfig::default(),
        }
    }
}

fn shape_arg(s: &str) -> Result<PrimitiveSpec, CliError> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| CliError::Usage(format!("--shape: {e}")));
    }
    default8()
        .into_iter()
        .chain(dissimilar5())
        .find(|(name, _)| name == s)
        .map(|(_, spec)| spec)
        .ok_or_else(|| CliError::Usage(format!("--shape: no preset object named `{s}`")))
}

fn mm(v: [f64; 3]) -> Vec3 {
    Vec3::from_array(v) * 1e-3
}

pub(super) fn render(a: RenderArgs) -> Result<(), CliError> {
    let mut cfg: RenderRunConfig = load_config(a.output.config.as_deref())?;
    if let Some(s) = &a.shape {
        cfg.shape = Some(shape_arg(s)?);
        cfg.obj = None;
    }
    if a.obj.is_some() {
        cfg.obj = a.obj;
        cfg.shape = None;
    }
    set(&mut cfg.obj_scale, a.obj_scale);
    if let Some(s) = &a.at {
        cfg.at_mm = Some(parse_triple(s)?);
        cfg.position_mm = None;
        cfg.normal = None;
    }
    if let (Some(p), Some(n)) = (&a.position, &a.normal) {
        cfg.position_mm = Some(parse_triple(p)?);
        cfg.normal = Some(parse_triple(n)?);
        cfg.at_mm = None;
    }
    if let Some(r) = a.max_range {
        cfg.render = RenderConfig::with_max_range(r);
    }
    if !(cfg.render.max_range_mm > 0.0 && cfg.render.max_range_mm.is_finite()) {
        return Err(CliError::Usage("max range must be positive".into()));
    }

    let mesh: TriangleMesh = match (&cfg.shape, &cfg.obj) {
        (Some(spec), None) => make_primitive(spec).map_err(|e| CliError::Usage(e.to_string()))?,
        (None, Some(path)) => {
            if !(cfg.obj_scale > 0.0 && cfg.obj_scale.is_finite()) {
                return Err(CliError::Usage("OBJ scale must be positive".into()));
            }
            let mesh = parse_obj(&fs::read_to_string(path)?).map_err(CliError::data)?;
            let vertices = mesh.vertices().iter().map(|v| *v * cfg.obj_scale).collect();
            TriangleMesh::new(vertices, mesh.triangles().to_vec()).map_err(CliError::data)?
        }
        _ => return Err(CliError::Usage("give exactly one of --shape or --obj".into())),
    };
    let bvh = Bvh::build(mesh).map_err(CliError::data)?;
    let pose = match (cfg.at_mm, cfg.position_mm, cfg.normal) {
        (Some(at), None, None) => contact_frame(&bvh, mm(at)),
        (None, Some(p), Some(n)) => {
            let n = Vec3::from_array(n).try_normalize().ok_or_else(|| CliError::Usage("bad pose: zero normal".into()))?;
            Pose::from_z_axis(mm(p), n, Vec3::X)
        }
        _ => return Err(CliError::Usage("bad pose: give --at, or --position with --normal".into())),
    };
    if !pose.is_valid() {
        return Err(CliError::Usage("bad pose: not a rigid transform".into()));
    }
    prepare_output(&a.output.out, "render", &cfg)?;

    let patch = render_patch(&bvh, &pose, &cfg.render);
    if patch.valid_count() == 0 {
        eprintln!("warning: no surface within range; normalized output is all far");
    }
    let normalized = normalize_or_far(&patch);
    let out = &a.output.out;
    patch_to_pgm(&patch).save(&out.join("raw.pgm"))?;
    normalized_to_pgm(&normalized).save(&out.join("normalized.pgm"))?;
    fs::write(out.join("raw.csv"), raw_csv(&patch))?;
    fs::write(out.join("normalized.csv"), normalized_csv(&normalized))?;
    println!("{} of {} cells hit the surface", patch.valid_count(), PATCH_SIZE * PATCH_SIZE);
    Ok(())
}

/// Depth in mm, row-major; missing cells are empty.
pub fn raw_csv(patch: &DepthPatch) -> String {
    grid_csv(|i| if patch.valid[i] { patch.values[i].to_string() } else { String::new() })
}

pub fn normalized_csv(patch: &NormalizedPatch) -> String {
    grid_csv(|i| patch.values[i].to_string())
}

fn grid_csv(cell: impl Fn(usize) -> String) -> String {
    let mut out = String::new();
    for r in 0..PATCH_SIZE {
        let row: Vec<String> = (0..PATCH_SIZE).map(|c| cell(r * PATCH_SIZE + c)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
