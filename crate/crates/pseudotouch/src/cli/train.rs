use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use pseudotouch_core::datasets::SplitSpec;
use pseudotouch_core::grasp::{evaluate_grasp_accuracy, train_grasp_classifier, GraspError};
use pseudotouch_core::model::{train, ModelError, TrainConfig};
use pseudotouch_core::recognition::calibrate_sigma_touch;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{load_config, prepare_output, require_path, set, write_json, CliError, OutputArgs};
use crate::pipeline::{constant_mse, mean_reading, network_mse, split_grasp, split_touch, touch_pairs};
use crate::ptds::{self, Dataset, Records};
use crate::ptnn;

/// Training flags shared by both networks.
#[derive(Debug, Args)]
pub struct TrainFlags {
    /// PTDS dataset produced by `gen-data`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed of the train/validation/test shuffle.
    #[arg(long)]
    pub split_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainPtArgs {
    #[command(flatten)]
    pub flags: TrainFlags,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TrainGraspArgs {
    #[command(flatten)]
    pub flags: TrainFlags,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainRunConfig {
    pub data: Option<PathBuf>,
    pub train: TrainConfig,
    pub split: SplitSpec,
}

/// Same fields as [`TrainRunConfig`] with the classifier's own defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspRunConfig {
    pub data: Option<PathBuf>,
    pub train: TrainConfig,
    pub split: SplitSpec,
}

impl Default for GraspRunConfig {
    fn default() -> Self {
        GraspRunConfig {
            data: None,
            train: TrainConfig {
                epochs: 200,
                batch_size: 16,
                ..TrainConfig::default()
            },
            split: SplitSpec::default(),
        }
    }
}

impl From<GraspRunConfig> for TrainRunConfig {
    fn from(g: GraspRunConfig) -> Self {
        TrainRunConfig {
            data: g.data,
            train: g.train,
            split: g.split,
        }
    }
}

fn resolve(flags: TrainFlags, base: TrainRunConfig) -> TrainRunConfig {
    let mut cfg = base;
    if flags.data.is_some() {
        cfg.data = flags.data;
    }
    set(&mut cfg.train.epochs, flags.epochs);
    set(&mut cfg.train.learning_rate, flags.lr);
    set(&mut cfg.train.batch_size, flags.batch_size);
    set(&mut cfg.train.seed, flags.seed);
    set(&mut cfg.split.seed, flags.split_seed);
    cfg
}

fn load_data(path: &Path) -> Result<Dataset, CliError> {
    if !path.exists() {
        return Err(CliError::Data(format!("dataset {} does not exist", path.display())));
    }
    Ok(ptds::load_dataset(path)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn model_error(e: ModelError) -> CliError {
    match e {
        ModelError::NonFiniteLoss { .. } | ModelError::NonFiniteParameter(_) => CliError::Numeric(e.to_string()),
        ModelError::InvalidConfig(_) => CliError::Usage(e.to_string()),
        _ => CliError::data(e),
    }
}

fn grasp_error(e: GraspError) -> CliError {
    match e {
        GraspError::NonFiniteLoss { .. } => CliError::Numeric(e.to_string()),
        GraspError::InvalidConfig(_) => CliError::Usage(e.to_string()),
        _ => CliError::data(e),
    }
}

pub(super) fn train_pt(a: TrainPtArgs) -> Result<(), CliError> {
    let cfg = resolve(a.flags, load_config(a.output.config.as_deref())?);
    let data = require_path(&cfg.data, "--data")?;
    prepare_output(&a.output.out, "train-pt", &cfg)?;
    let ds = load_data(&data)?;
    let Records::Touch(records) = &ds.records else {
        return Err(CliError::Data("train-pt needs a touch dataset".into()));
    };
    let pairs = touch_pairs(&split_touch(records, &cfg.split).map_err(CliError::data)?);
    let outcome = train(&pairs.train, Some(&pairs.val), &cfg.train).map_err(model_error)?;
    if !outcome.params.is_finite() {
        return Err(CliError::Numeric("trained parameters are not finite".into()));
    }

    let mut csv = String::from("step,train_mse,val_mse\n");
    for e in &outcome.history {
        let _ = writeln!(csv, "{},{},{}", e.step, e.train_mse, opt(e.val_mse));
    }
    fs::write(a.output.out.join("loss.csv"), csv)?;
    ptnn::save_params(&a.output.out.join("params.ptnn"), &outcome.params)?;

    let mean = mean_reading(&pairs.train);
    let summary = json!({
        "train_pairs": pairs.train.len(),
        "val_pairs": pairs.val.len(),
        "test_pairs": pairs.test.len(),
        "selected_epoch": outcome.selected_epoch,
        "val_mse": network_mse(&outcome.params, &pairs.val),
        "val_mse_mean_predictor": constant_mse(&mean, &pairs.val),
        "test_mse": network_mse(&outcome.params, &pairs.test),
        "test_mse_mean_predictor": constant_mse(&mean, &pairs.test),
        "sigma_touch_calibrated": calibrate_sigma_touch(&outcome.params, &pairs.val),
    });
    write_json(&a.output.out.join("summary.json"), &summary)?;
    println!(
        "selected epoch {}: val MSE {:.4} (mean predictor {:.4}), test MSE {:.4} (mean predictor {:.4})",
        outcome.selected_epoch, summary["val_mse"], summary["val_mse_mean_predictor"], summary["test_mse"], summary["test_mse_mean_predictor"]
    );
    Ok(())
}

pub(super) fn train_grasp(a: TrainGraspArgs) -> Result<(), CliError> {
    let base: GraspRunConfig = load_config(a.output.config.as_deref())?;
    let cfg = resolve(a.flags, base.into());
    let data = require_path(&cfg.data, "--data")?;
    prepare_output(&a.output.out, "train-grasp", &cfg)?;
    let ds = load_data(&data)?;
    let Records::Grasp(records) = &ds.records else {
        return Err(CliError::Data("train-grasp needs a grasp dataset".into()));
    };
    let split = split_grasp(records, &cfg.split).map_err(CliError::data)?;
    let outcome = train_grasp_classifier(&split.train, Some(&split.val), &cfg.train).map_err(grasp_error)?;

    let mut csv = String::from("step,train_bce,val_bce,train_accuracy,val_accuracy\n");
    for e in &outcome.history {
        let _ = writeln!(csv, "{},{},{},{},{}", e.step, e.train_loss, opt(e.val_loss), e.train_accuracy, opt(e.val_accuracy));
    }
    fs::write(a.output.out.join("loss.csv"), csv)?;
    ptnn::save_grasp_params(&a.output.out.join("grasp.ptnn"), &outcome.params)?;
    let test_accuracy = evaluate_grasp_accuracy(&outcome.params, &split.test).map_err(grasp_error)?;
    let summary = json!({
        "train_samples": split.train.len(),
        "val_samples": split.val.len(),
        "test_samples": split.test.len(),
        "selected_epoch": outcome.selected_epoch,
        "test_accuracy": test_accuracy,
    });
    write_json(&a.output.out.join("summary.json"), &summary)?;
    println!("selected epoch {}: test accuracy {:.3} on {} grasps", outcome.selected_epoch, test_accuracy, split.test.len());
    Ok(())
}
