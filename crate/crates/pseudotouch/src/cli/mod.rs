//! The `pseudotouch` subcommands.
//!
//! Every command that writes outputs resolves its configuration as
//! flags > `--config` JSON file > defaults, and writes the resolved config to
//! `config.json` in its output directory. Exit codes: 0 ok, 2 usage, 3 data
//! error, 4 numeric failure.

mod data;
mod eval;
mod render;
mod train;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::FormatError;

pub use data::{GenDataArgs, InspectArgs};
pub use eval::{EvalGraspArgs, EvalRecognitionArgs};
pub use render::RenderArgs;
pub use train::{TrainGraspArgs, TrainPtArgs};

#[derive(Debug, Parser)]
#[command(name = "pseudotouch", version, about = "Tactile-reading prediction from depth patches: data, training and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a touch or grasp dataset.
    GenData(GenDataArgs),
    /// Train the tactile predictor on a touch dataset.
    TrainPt(TrainPtArgs),
    /// Train the grasp-success classifier on a grasp dataset.
    TrainGrasp(TrainGraspArgs),
    /// Run recognition episodes and the pooled ablation.
    EvalRecognition(EvalRecognitionArgs),
    /// Score a trained grasp classifier on its test split.
    EvalGrasp(EvalGraspArgs),
    /// Render a depth patch on a shape and dump it as PGM and CSV.
    Render(RenderArgs),
    /// Describe a dataset, params file or PGM image.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    Touch,
    Grasp,
}

/// Options shared by every command that writes outputs.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// JSON file with config values; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Format(_) | CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub(crate) fn data(e: impl std::fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Format(FormatError::Io(e))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenData(a) => data::gen_data(a),
        Command::TrainPt(a) => train::train_pt(a),
        Command::TrainGrasp(a) => train::train_grasp(a),
        Command::EvalRecognition(a) => eval::eval_recognition(a),
        Command::EvalGrasp(a) => eval::eval_grasp(a),
        Command::Render(a) => render::render(a),
        Command::Inspect(a) => data::inspect(a),
    }
}

/// Base config from the file if given, else defaults.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(FormatError::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Creates the output directory and writes the resolved config snapshot.
fn prepare_output<T: Serialize>(out: &Path, command: &str, config: &T) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    write_json(&out.join("config.json"), &serde_json::json!({ "command": command, "config": config }))
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn require_path(path: &Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    path.clone().ok_or_else(|| CliError::Usage(format!("{what} is required (flag or config)")))
}

/// Parses `x,y,z`.
fn parse_triple(s: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("expected x,y,z but got `{s}`")))?;
    match parts[..] {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok([x, y, z]),
        _ => Err(CliError::Usage(format!("expected three finite numbers x,y,z but got `{s}`"))),
    }
}
