use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::Args;
use pseudotouch_core::datasets::{generate_touch_dataset, TouchDatasetConfig};
use pseudotouch_core::grasp::{generate_grasp_dataset, GraspDatasetConfig};
use pseudotouch_core::oracle::OracleParams;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{load_config, prepare_output, set, write_json, CliError, DataKind, OutputArgs};
use crate::pgm::Pgm16;
use crate::ptds::{self, Dataset, DatasetSource, PredictorSource, Records, StoredPredictor};
use crate::ptnn;
use crate::shapes::{self, ShapeEntry};

#[derive(Debug, Args)]
pub struct GenDataArgs {
    pub kind: DataKind,
    /// Object set: default8, dissimilar5, procedural:<count> or a shape JSON file.
    #[arg(long)]
    pub shapes: Option<String>,
    /// Touch records to generate (touch only).
    #[arg(long)]
    pub n: Option<usize>,
    /// Procedural objects to draw when no shape set is given (grasp only).
    #[arg(long)]
    pub objects: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tactile network used for grasp finger readings instead of the oracle (grasp only).
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TouchGenConfig {
    pub shapes: String,
    pub oracle: OracleParams,
    pub dataset: TouchDatasetConfig,
}

impl Default for TouchGenConfig {
    fn default() -> Self {
        TouchGenConfig {
            shapes: "default8".into(),
            oracle: OracleParams::default(),
            dataset: TouchDatasetConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspGenConfig {
    /// Overrides the procedural set when present.
    pub shapes: Option<String>,
    pub objects: usize,
    pub oracle: OracleParams,
    pub params: Option<PathBuf>,
    pub dataset: GraspDatasetConfig,
}

impl Default for GraspGenConfig {
    fn default() -> Self {
        GraspGenConfig {
            shapes: None,
            objects: 20,
            oracle: OracleParams::default(),
            params: None,
            dataset: GraspDatasetConfig::default(),
        }
    }
}

pub(super) fn gen_data(a: GenDataArgs) -> Result<(), CliError> {
    match a.kind {
        DataKind::Touch => gen_touch(a),
        DataKind::Grasp => gen_grasp(a),
    }
}

fn gen_touch(a: GenDataArgs) -> Result<(), CliError> {
    if a.objects.is_some() || a.params.is_some() {
        return Err(CliError::Usage("--objects and --params apply to grasp data only".into()));
    }
    let mut cfg: TouchGenConfig = load_config(a.output.config.as_deref())?;
    set(&mut cfg.shapes, a.shapes);
    set(&mut cfg.dataset.n_samples, a.n);
    set(&mut cfg.dataset.seed, a.seed);
    if cfg.dataset.n_samples == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    cfg.oracle.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    prepare_output(&a.output.out, "gen-data touch", &cfg)?;

    let entries = shapes::resolve(&cfg.shapes, cfg.dataset.seed)?;
    let set = shapes::object_set(&entries).map_err(CliError::data)?;
    let generated = generate_touch_dataset(&set, &cfg.oracle, &cfg.dataset);
    for (id, e) in &generated.skipped {
        eprintln!("warning: record {id} skipped: {e}");
    }
    let mut per_object: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &generated.records {
        *per_object.entry(&entries[r.object_id as usize].name).or_default() += 1;
    }
    let summary = json!({
        "kind": "touch",
        "records": generated.records.len(),
        "skipped": generated.skipped.iter().map(|(id, e)| json!({"record": id, "reason": e.to_string()})).collect::<Vec<_>>(),
        "per_object": per_object,
    });
    let ds = Dataset::new(cfg.oracle, entries, DatasetSource::Touch { config: cfg.dataset }, Records::Touch(generated.records))?;
    ptds::save_dataset(&a.output.out.join("dataset.ptds"), &ds)?;
    write_json(&a.output.out.join("summary.json"), &summary)?;
    println!("wrote {} touch records to {}", ds.records.len(), a.output.out.join("dataset.ptds").display());
    Ok(())
}

fn gen_grasp(a: GenDataArgs) -> Result<(), CliError> {
    if a.n.is_some() {
        return Err(CliError::Usage("--n applies to touch data only; use --objects".into()));
    }
    let mut cfg: GraspGenConfig = load_config(a.output.config.as_deref())?;
    if a.shapes.is_some() {
        cfg.shapes = a.shapes;
    }
    set(&mut cfg.objects, a.objects);
    set(&mut cfg.dataset.seed, a.seed);
    if a.params.is_some() {
        cfg.params = a.params;
    }
    if cfg.shapes.is_some() && a.objects.is_some() {
        return Err(CliError::Usage("--objects draws a procedural set and cannot be combined with --shapes".into()));
    }
    cfg.oracle.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    prepare_output(&a.output.out, "gen-data grasp", &cfg)?;

    let entries = match &cfg.shapes {
        Some(sel) => shapes::resolve(sel, cfg.dataset.seed)?,
        None => shapes::entries(shapes::procedural(cfg.objects, cfg.dataset.seed)),
    };
    let set = shapes::object_set(&entries).map_err(CliError::data)?;
    let source = match &cfg.params {
        Some(p) => PredictorSource::network(&ptnn::load_params(p)?),
        None => PredictorSource::Oracle,
    };
    let predictor = StoredPredictor::from_source(&source, &cfg.oracle)?;
    let generated = generate_grasp_dataset(&set, &predictor, &cfg.dataset);
    for id in &generated.skipped {
        eprintln!("warning: object {id} skipped: label quota not reached within the sampling budget");
    }
    let summary = grasp_summary(&entries, &generated.records, &generated.skipped);
    let ds = Dataset::new(cfg.oracle, entries, DatasetSource::Grasp { config: cfg.dataset, predictor: source }, Records::Grasp(generated.records))?;
    ptds::save_dataset(&a.output.out.join("dataset.ptds"), &ds)?;
    write_json(&a.output.out.join("summary.json"), &summary)?;
    println!("wrote {} grasp records to {}", ds.records.len(), a.output.out.join("dataset.ptds").display());
    Ok(())
}

fn grasp_summary(entries: &[ShapeEntry], records: &[pseudotouch_core::grasp::GraspRecord], skipped: &[u32]) -> Value {
    let mut per_object: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
    for r in records {
        per_object.entry(&entries[r.object_id as usize].name).or_default()[r.label as usize] += 1;
    }
    let positive = records.iter().filter(|r| r.label).count();
    json!({
        "kind": "grasp",
        "records": records.len(),
        "skipped_objects": skipped,
        "label_balance": positive as f64 / records.len().max(1) as f64,
        "per_object": per_object.iter().map(|(k, [neg, pos])| (k.to_string(), json!({"positive": pos, "negative": neg}))).collect::<BTreeMap<_, _>>(),
    })
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub path: PathBuf,
}

pub(super) fn inspect(a: InspectArgs) -> Result<(), CliError> {
    let bytes = fs::read(&a.path)?;
    let info = match bytes.get(..4) {
        Some(b"PTDS") => {
            let ds = ptds::decode(&bytes)?;
            let mut per_object: BTreeMap<u32, usize> = BTreeMap::new();
            let (kind, positive) = match &ds.records {
                Records::Touch(rs) => {
                    rs.iter().for_each(|r| *per_object.entry(r.object_id).or_default() += 1);
                    ("touch", None)
                }
                Records::Grasp(rs) => {
                    rs.iter().for_each(|r| *per_object.entry(r.object_id).or_default() += 1);
                    ("grasp", Some(rs.iter().filter(|r| r.label).count()))
                }
            };
            let mut header = serde_json::to_value(&ds.header).map_err(crate::FormatError::from)?;
            if let Some(p) = header.pointer_mut("/source/predictor/params") {
                *p = json!(format!("<{} values>", p.as_array().map_or(0, Vec::len)));
            }
            json!({
                "format": "PTDS",
                "kind": kind,
                "records": ds.records.len(),
                "positive_labels": positive,
                "records_per_object": per_object,
                "header": header,
            })
        }
        Some(b"PTNN") => {
            let arch = ptnn::peek_architecture(&bytes)?;
            let data = match arch {
                1 => ptnn::decode(&bytes, ptnn::Architecture::Tactile)?,
                _ => ptnn::decode(&bytes, ptnn::Architecture::Grasp)?,
            };
            json!({
                "format": "PTNN",
                "architecture": if arch == 1 { "tactile" } else { "grasp" },
                "parameters": data.len(),
                "l2_norm": data.iter().map(|x| x * x).sum::<f64>().sqrt(),
                "finite": data.iter().all(|x| x.is_finite()),
            })
        }
        Some([b'P', b'5', ..]) => {
            let pgm = Pgm16::decode(&bytes)?;
            let nonzero: Vec<u16> = pgm.samples.iter().copied().filter(|&s| s != 0).collect();
            json!({
                "format": "PGM",
                "width": pgm.width,
                "height": pgm.height,
                "missing": pgm.samples.len() - nonzero.len(),
                "min_mm": nonzero.iter().min().map(|&s| s as f64 * crate::pgm::DEPTH_UNIT_MM),
                "max_mm": nonzero.iter().max().map(|&s| s as f64 * crate::pgm::DEPTH_UNIT_MM),
            })
        }
        _ => return Err(CliError::Data(format!("{}: unrecognized file type", a.path.display()))),
    };
    let text = serde_json::to_string_pretty(&info).map_err(crate::FormatError::from)?;
    // A closed pipe on stdout is not an error of this command.
    let _ = writeln!(std::io::stdout(), "{text}");
    Ok(())
}
