//! Touch dataset generation, degraded/clean pairing, splits and replay.
//!
//! Every record carries its own seed. Stream 0 of that seed drives patch
//! degradation, stream 1 the sensor noise and stream 2 touch planning, so the
//! stored reading can be recomputed from the stored patches.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{AcceptParams, SampleMode};
use crate::math::{floor, Pose};
use crate::oracle::{add_sensor_noise, oracle_reading, OracleParams, TactileReading};
use crate::patch::{degrade_patch, normalize_or_far, render_patch, DegradeConfig, DepthPatch, NormalizedPatch, RenderConfig};
use crate::recognition::{contact_frame, plan_touch, ObjectSet, RecognitionConfig, RecognitionError};

pub const STREAM_DEGRADE: u64 = 0;
pub const STREAM_SENSOR: u64 = 1;
pub const STREAM_PLAN: u64 = 2;
pub const MIN_SPLIT_RECORDS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetError {
    TooFewRecords(usize),
    InvalidFractions,
    Recognition(RecognitionError),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::TooFewRecords(n) => {
                write!(f, "need at least {MIN_SPLIT_RECORDS} records to split, got {n}")
            }
            DatasetError::InvalidFractions => write!(f, "split fractions must be non-negative and sum to 1"),
            DatasetError::Recognition(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DatasetError {}

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of record `id` under a dataset seed.
pub fn record_seed(dataset_seed: u64, id: u64) -> u64 {
    splitmix64(dataset_seed ^ splitmix64(id))
}

/// Random stream `stream` of a record seed.
pub fn record_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One touch: a degraded ("real-like") and a clean ("simulated") patch at
/// the same contact pose, and the reading of the degraded one.
#[derive(Clone, Debug, PartialEq)]
pub struct TouchRecord {
    pub record_id: u32,
    pub object_id: u32,
    pub contact_pose: Pose,
    pub patch_real_like: DepthPatch,
    pub patch_sim: DepthPatch,
    pub reading: TactileReading,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TouchDatasetConfig {
    pub n_samples: usize,
    pub degrade: DegradeConfig,
    pub sensor_noise_sd: f64,
    pub sample_mode: SampleMode,
    pub accept: AcceptParams,
    pub render: RenderConfig,
    pub seed: u64,
}

impl Default for TouchDatasetConfig {
    fn default() -> Self {
        TouchDatasetConfig {
            n_samples: 1600,
            degrade: DegradeConfig::default(),
            sensor_noise_sd: 2.0,
            sample_mode: SampleMode::Vertex,
            accept: AcceptParams::default(),
            render: RenderConfig::default(),
            seed: 0,
        }
    }
}

impl TouchDatasetConfig {
    fn planning(&self) -> RecognitionConfig {
        RecognitionConfig {
            sample_mode: self.sample_mode,
            accept: self.accept,
            render: self.render,
            ..RecognitionConfig::default()
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TouchDataset {
    pub records: Vec<TouchRecord>,
    /// Record ids whose touch could not be planned, with the reason.
    pub skipped: Vec<(u32, RecognitionError)>,
}

/// Reading recorded for a degraded patch under a record seed.
pub fn record_reading(patch_real_like: &DepthPatch, oracle: &OracleParams, seed: u64, sensor_noise_sd: f64) -> TactileReading {
    let clean = oracle_reading(&normalize_or_far(patch_real_like), oracle);
    add_sensor_noise(&clean, &mut record_rng(seed, STREAM_SENSOR), sensor_noise_sd)
}

/// Generates one record; object `record_id % |set|` is touched.
pub fn generate_touch_record(
    set: &ObjectSet,
    record_id: u32,
    oracle: &OracleParams,
    cfg: &TouchDatasetConfig,
) -> Result<TouchRecord, RecognitionError> {
    let index = record_id as usize % set.len();
    let obj = &set.objects()[index];
    let seed = record_seed(cfg.seed, record_id as u64);
    let (point, _) = plan_touch(&obj.bvh, obj.id, &mut record_rng(seed, STREAM_PLAN), &cfg.planning())?;
    let pose = contact_frame(&obj.bvh, point);
    let patch_sim = render_patch(&obj.bvh, &pose, &cfg.render);
    let patch_real_like = degrade_patch(&patch_sim, &mut record_rng(seed, STREAM_DEGRADE), &cfg.degrade);
    let reading = record_reading(&patch_real_like, oracle, seed, cfg.sensor_noise_sd);
    Ok(TouchRecord {
        record_id,
        object_id: obj.id,
        contact_pose: pose,
        patch_real_like,
        patch_sim,
        reading,
        seed,
    })
}

/// Round-robin over the set: record `i` touches object `i mod |set|`.
pub fn generate_touch_dataset(set: &ObjectSet, oracle: &OracleParams, cfg: &TouchDatasetConfig) -> TouchDataset {
    let mut out = TouchDataset::default();
    for id in 0..cfg.n_samples as u32 {
        match generate_touch_record(set, id, oracle, cfg) {
            Ok(r) => out.records.push(r),
            Err(e) => out.skipped.push((id, e)),
        }
    }
    out
}

/// Whether a stored record is reproduced by its seed: the degraded patch from
/// the clean one, and the reading from the degraded patch.
pub fn replay_matches(record: &TouchRecord, oracle: &OracleParams, cfg: &TouchDatasetConfig) -> bool {
    let degraded = degrade_patch(&record.patch_sim, &mut record_rng(record.seed, STREAM_DEGRADE), &cfg.degrade);
    degraded == record.patch_real_like
        && record_reading(&record.patch_real_like, oracle, record.seed, cfg.sensor_noise_sd) == record.reading
}

/// Two training pairs per record: degraded patch and clean patch, both with
/// the recorded reading.
pub fn expand_with_sim_pairs(records: &[TouchRecord]) -> Vec<(NormalizedPatch, TactileReading)> {
    let mut out = Vec::with_capacity(2 * records.len());
    for r in records {
        out.push((normalize_or_far(&r.patch_real_like), r.reading));
        out.push((normalize_or_far(&r.patch_sim), r.reading));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.7,
            val: 0.1,
            test: 0.2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<u32>,
    pub val: Vec<u32>,
    pub test: Vec<u32>,
}

/// Seeded shuffle, cut at `floor(train·n)` and `floor((train+val)·n)`.
pub fn make_splits(ids: &[u32], spec: &SplitSpec) -> Result<Splits, DatasetError> {
    let fr = [spec.train, spec.val, spec.test];
    if fr.iter().any(|&f| !(f >= 0.0)) || (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(DatasetError::InvalidFractions);
    }
    if ids.len() < MIN_SPLIT_RECORDS {
        return Err(DatasetError::TooFewRecords(ids.len()));
    }
    let n = ids.len();
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    // The tolerance keeps 0.7 + 0.1 from cutting at 79 of 100.
    let cut = |f: f64| (floor(f * n as f64 + 1e-9) as usize).min(n);
    let a = cut(spec.train);
    let b = cut(spec.train + spec.val).max(a);
    Ok(Splits {
        train: shuffled[..a].to_vec(),
        val: shuffled[a..b].to_vec(),
        test: shuffled[b..].to_vec(),
    })
}
