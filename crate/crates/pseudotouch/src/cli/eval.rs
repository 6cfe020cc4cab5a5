use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use pseudotouch_core::datasets::{record_rng, record_seed, SplitSpec};
use pseudotouch_core::recognition::{record_pool, run_episode, MeasurementNoise, Modality, RecognitionConfig, ScoredPools};
use pseudotouch_core::oracle::OracleParams;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{load_config, prepare_output, require_path, set, write_json, CliError, OutputArgs};
use crate::pipeline::split_grasp;
use crate::ptds::{self, Records, StoredPredictor};
use crate::ptnn;
use crate::report::{GraspReport, ModalityAccuracy, RecognitionReport};
use crate::shapes;

#[derive(Debug, Args)]
pub struct EvalRecognitionArgs {
    /// Object set: default8, dissimilar5, procedural:<count> or a shape JSON file.
    #[arg(long)]
    pub shapes: Option<String>,
    /// Trained tactile network.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Use the sensor oracle as the predictor instead of a trained network.
    #[arg(long)]
    pub oracle_predictor: bool,
    /// Disable all measurement noise.
    #[arg(long)]
    pub noiseless: bool,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub touches: Option<usize>,
    /// Observations per pooled trial.
    #[arg(long)]
    pub pooled_n: Option<usize>,
    /// Recorded touches per object for the pooled ablation.
    #[arg(long)]
    pub pool_size: Option<usize>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub sigma_touch: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorChoice {
    Network,
    Oracle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecognitionRunConfig {
    pub shapes: String,
    pub predictor: PredictorChoice,
    pub params: Option<PathBuf>,
    pub episodes_per_object: usize,
    pub pooled_n: usize,
    pub pool_size: usize,
    pub pooled_repetitions: usize,
    pub oracle: OracleParams,
    pub recognition: RecognitionConfig,
}

impl Default for RecognitionRunConfig {
    fn default() -> Self {
        RecognitionRunConfig {
            shapes: "default8".into(),
            predictor: PredictorChoice::Network,
            params: None,
            episodes_per_object: 5,
            pooled_n: 150,
            pool_size: 200,
            pooled_repetitions: 20,
            oracle: OracleParams::default(),
            recognition: RecognitionConfig::default(),
        }
    }
}

const STREAM_EPISODE: u64 = 10;
const STREAM_POOL: u64 = 11;
const STREAM_TRIAL: u64 = 12;

pub(super) fn eval_recognition(a: EvalRecognitionArgs) -> Result<(), CliError> {
    let mut cfg: RecognitionRunConfig = load_config(a.output.config.as_deref())?;
    set(&mut cfg.shapes, a.shapes);
    if a.params.is_some() {
        cfg.params = a.params;
    }
    if a.oracle_predictor {
        cfg.predictor = PredictorChoice::Oracle;
    }
    if a.noiseless {
        cfg.recognition.noise = MeasurementNoise::NONE;
    }
    set(&mut cfg.episodes_per_object, a.episodes);
    set(&mut cfg.recognition.n_touches, a.touches);
    set(&mut cfg.pooled_n, a.pooled_n);
    set(&mut cfg.pool_size, a.pool_size);
    set(&mut cfg.pooled_repetitions, a.repetitions);
    set(&mut cfg.recognition.sigma_touch, a.sigma_touch);
    set(&mut cfg.recognition.seed, a.seed);
    cfg.recognition.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if cfg.pool_size < cfg.pooled_n {
        return Err(CliError::Usage(format!("pool size {} is below pooled n {}", cfg.pool_size, cfg.pooled_n)));
    }
    let predictor = match cfg.predictor {
        PredictorChoice::Oracle => StoredPredictor::Oracle(cfg.oracle),
        PredictorChoice::Network => {
            let path = require_path(&cfg.params, "--params (or --oracle-predictor)")?;
            if !path.exists() {
                return Err(CliError::Data(format!("params file {} does not exist", path.display())));
            }
            StoredPredictor::Network(ptnn::load_params(&path)?)
        }
    };
    prepare_output(&a.output.out, "eval-recognition", &cfg)?;

    let entries = shapes::resolve(&cfg.shapes, cfg.recognition.seed)?;
    let set = shapes::object_set(&entries).map_err(CliError::data)?;
    let names: Vec<String> = entries.iter().map(|e| e.name.clone()).collect();
    let seed = cfg.recognition.seed;

    let pools = (0..set.len())
        .map(|k| record_pool(&set, k, cfg.pool_size, &cfg.oracle, &cfg.recognition, &mut record_rng(record_seed(seed, k as u64), STREAM_POOL)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::data)?;

    let mut log = String::new();
    let mut accuracy = BTreeMap::new();
    let mut per_object = BTreeMap::new();
    for (mi, modality) in Modality::ALL.into_iter().enumerate() {
        let rc = RecognitionConfig { modality, ..cfg.recognition };
        let mut object_acc = BTreeMap::new();
        let mut correct_total = 0;
        for (k, name) in names.iter().enumerate() {
            let mut correct = 0;
            for e in 0..cfg.episodes_per_object {
                let key = ((mi as u64) << 48) | ((k as u64) << 24) | e as u64;
                let mut rng = record_rng(record_seed(seed, key), STREAM_EPISODE);
                let result = run_episode(&set, k, &predictor, &cfg.oracle, &rc, &mut rng).map_err(CliError::data)?;
                correct += result.correct() as usize;
                for (step, s) in result.steps.iter().enumerate() {
                    let o = &s.observation;
                    let line = json!({
                        "modality": modality.label(), "object": name, "episode": e, "step": step,
                        "hypothesis": names[s.hypothesis],
                        "desired": o.desired, "location": o.location, "missed": o.missed,
                        "reading": o.reading, "log_scores": s.log_scores, "belief": s.belief,
                    });
                    let _ = writeln!(log, "{line}");
                }
            }
            correct_total += correct;
            object_acc.insert(name.clone(), correct as f64 / cfg.episodes_per_object.max(1) as f64);
        }
        let scored = ScoredPools::new(&set, &pools, &predictor, &rc).map_err(CliError::data)?;
        let mut trial_rng = record_rng(record_seed(seed, mi as u64), STREAM_TRIAL);
        let pooled = scored.accuracy(cfg.pooled_n, cfg.pooled_repetitions, &mut trial_rng).map_err(CliError::data)?;
        let informed = correct_total as f64 / (names.len() * cfg.episodes_per_object).max(1) as f64;
        accuracy.insert(modality.label().to_owned(), ModalityAccuracy { informed, pooled });
        per_object.insert(modality.label().to_owned(), object_acc);
    }

    let report = RecognitionReport {
        predictor: match cfg.predictor {
            PredictorChoice::Oracle => "oracle".into(),
            PredictorChoice::Network => "network".into(),
        },
        objects: names,
        episodes_per_object: cfg.episodes_per_object,
        touches_per_episode: cfg.recognition.n_touches,
        pooled_n: cfg.pooled_n,
        pooled_repetitions: cfg.pooled_repetitions,
        accuracy,
        per_object,
    };
    fs::write(a.output.out.join("episodes.jsonl"), log)?;
    write_json(&a.output.out.join("report.json"), &report)?;
    let table = report.table();
    fs::write(a.output.out.join("table.txt"), &table)?;
    print!("{table}");
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvalGraspArgs {
    /// Grasp PTDS dataset.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Trained classifier from `train-grasp`.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Must match the seed used for training to score the held-out objects.
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspEvalConfig {
    pub data: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub split: SplitSpec,
}

pub(super) fn eval_grasp(a: EvalGraspArgs) -> Result<(), CliError> {
    let mut cfg: GraspEvalConfig = load_config(a.output.config.as_deref())?;
    if a.data.is_some() {
        cfg.data = a.data;
    }
    if a.params.is_some() {
        cfg.params = a.params;
    }
    set(&mut cfg.split.seed, a.split_seed);
    let data = require_path(&cfg.data, "--data")?;
    let params_path = require_path(&cfg.params, "--params")?;
    for p in [&data, &params_path] {
        if !p.exists() {
            return Err(CliError::Data(format!("{} does not exist", p.display())));
        }
    }
    prepare_output(&a.output.out, "eval-grasp", &cfg)?;
    let params = ptnn::load_grasp_params(&params_path)?;
    let ds = ptds::load_dataset(&data)?;
    let Records::Grasp(records) = &ds.records else {
        return Err(CliError::Data("eval-grasp needs a grasp dataset".into()));
    };
    let split = split_grasp(records, &cfg.split).map_err(CliError::data)?;
    if split.test.is_empty() {
        return Err(CliError::Data("test split is empty".into()));
    }
    let report = GraspReport::evaluate(&params, &split.test);
    write_json(&a.output.out.join("report.json"), &report)?;
    let table = report.table();
    fs::write(a.output.out.join("table.txt"), &table)?;
    print!("{table}");
    Ok(())
}
